#include "ppm/models.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ppm {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Lstm: return "lstm";
        case ModelKind::LstmAttention: return "lstm_attention";
        case ModelKind::Cnn: return "cnn";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "lstm") return ModelKind::Lstm;
    if (s == "lstm_attention") return ModelKind::LstmAttention;
    if (s == "cnn") return ModelKind::Cnn;
    throw std::invalid_argument("unknown model kind: " + s);
}

void ModelConfig::validate() const {
    if (seq_len < 1) throw std::invalid_argument("ModelConfig: seq_len >= 1 required");
    if (size_multiplier < 1 || size_multiplier > 16)
        throw std::invalid_argument("ModelConfig: size_multiplier must be in 1..16");
    if (kind == ModelKind::Cnn && kernel_size > seq_len)
        throw std::invalid_argument("InvalidGeometry: kernel_size > seq_len");
    if (batch_size < 1) throw std::invalid_argument("ModelConfig: batch_size >= 1 required");
}

std::string ModelConfig::to_text() const {
    std::ostringstream os;
    os << "kind=" << to_string(kind) << "\nseq_len=" << seq_len << "\nbatch_size=" << batch_size
       << "\nsize_multiplier=" << size_multiplier << "\nkernel_size=" << kernel_size
       << "\nseed=" << seed << "\nmax_epochs=" << max_epochs << "\npatience=" << patience
       << "\nlearning_rate=" << learning_rate << "\n";
    return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
    ModelConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "kind") c.kind = model_kind_from_string(val);
        else if (key == "seq_len") c.seq_len = std::stoul(val);
        else if (key == "batch_size") c.batch_size = std::stoul(val);
        else if (key == "size_multiplier") c.size_multiplier = std::stoul(val);
        else if (key == "kernel_size") c.kernel_size = std::stoul(val);
        else if (key == "seed") c.seed = std::stoull(val);
        else if (key == "max_epochs") c.max_epochs = std::stoul(val);
        else if (key == "patience") c.patience = std::stoul(val);
        else if (key == "learning_rate") c.learning_rate = std::stod(val);
    }
    return c;
}

std::size_t EncodedSchema::input_width() const {
    std::size_t w = n_range;
    for (const auto& c : cat_cols) w += c.embed_dim;
    return w;
}

EncodedSchema EncodedSchema::from(const ColumnLayout& layout, const Encoders& enc) {
    EncodedSchema s;
    for (const auto& name : layout.cat_features) {
        const Vocabulary* v = enc.vocab_for(name);
        if (!v) throw std::runtime_error("EncodedSchema: no vocabulary for " + name);
        s.cat_cols.push_back({name, v->size(), v->embedding_dim()});
    }
    s.n_range = layout.range_features.size();
    return s;
}

Network::Network(const ModelConfig& config, const EncodedSchema& schema)
    : config_(config), schema_(schema) {
    config_.validate();
    Rng rng(config_.seed);
    const std::size_t m = config_.size_multiplier;
    const std::size_t width = kBaseWidth * m;
    const std::size_t D = schema_.input_width();

    for (const auto& c : schema_.cat_cols)
        embeddings_.emplace_back("embed." + c.name, c.vocab, c.embed_dim, rng);

    switch (config_.kind) {
        case ModelKind::Lstm:
            lstm_.emplace("lstm", D, width, rng);
            hidden_.emplace("hidden", width, width, Activation::ReLU, rng);
            break;
        case ModelKind::LstmAttention:
            lstm_.emplace("lstm", D, width, rng);
            attention_.emplace("attn", width, width, rng);
            hidden_.emplace("hidden", width, width, Activation::ReLU, rng);
            break;
        case ModelKind::Cnn: {
            const std::size_t k = config_.kernel_size;
            const std::size_t S = config_.seq_len;
            if (k > S) throw std::invalid_argument("InvalidGeometry: kernel_size > seq_len");
            std::size_t len = S;
            std::size_t in_ch = D;
            std::size_t filters = width;
            convs_.emplace_back("conv1", in_ch, filters, k, Activation::ReLU, rng);
            len = len - k + 1;
            bool pool1 = len >= 2;
            pool_after_.push_back(pool1);
            if (pool1) len /= 2;
            // second conv/pool pair only when it still fits
            if (len >= k + 1) {
                convs_.emplace_back("conv2", filters, 2 * filters, k, Activation::ReLU, rng);
                len = len - k + 1;
                bool pool2 = len >= 2;
                pool_after_.push_back(pool2);
                if (pool2) len /= 2;
                filters *= 2;
            }
            pools_.resize(convs_.size());
            hidden_.emplace("hidden", len * filters, width, Activation::ReLU, rng);
            break;
        }
    }
    out_.emplace("out", kBaseWidth * m, 1, Activation::Sigmoid, rng);
}

Tensor Network::gather_input(const std::vector<const PrefixMatrix*>& batch) {
    const std::size_t B = batch.size();
    const std::size_t S = config_.seq_len;
    const std::size_t D = schema_.input_width();
    const std::size_t n_cat = schema_.cat_cols.size();
    const std::size_t n_range = schema_.n_range;
    batch_B_ = B;

    Tensor x({B, S, D});
    std::size_t offset = 0;
    for (std::size_t j = 0; j < n_cat; ++j) {
        std::vector<std::int32_t> idx(B * S);
        for (std::size_t b = 0; b < B; ++b) {
            if (batch[b]->cats.size() != S * n_cat || batch[b]->ranges.size() != S * n_range)
                throw std::invalid_argument("Network: ShapeMismatch");
            for (std::size_t t = 0; t < S; ++t) idx[b * S + t] = batch[b]->cats[t * n_cat + j];
        }
        Tensor emb = embeddings_[j].forward(idx, B, S);
        const std::size_t d = embeddings_[j].dim();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < S; ++t)
                for (std::size_t c = 0; c < d; ++c) x.at(b, t, offset + c) = emb.at(b, t, c);
        offset += d;
    }
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < S; ++t)
            for (std::size_t j = 0; j < n_range; ++j)
                x.at(b, t, offset + j) = batch[b]->ranges[t * n_range + j];
    return x;
}

void Network::scatter_input_grad(const Tensor& dx) {
    const std::size_t B = dx.dim(0), S = dx.dim(1);
    std::size_t offset = 0;
    for (auto& emb : embeddings_) {
        const std::size_t d = emb.dim();
        Tensor de({B, S, d});
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < S; ++t)
                for (std::size_t c = 0; c < d; ++c) de.at(b, t, c) = dx.at(b, t, offset + c);
        emb.backward(de);
        offset += d;
    }
    // range columns carry no parameters
}

std::vector<double> Network::forward(const std::vector<const PrefixMatrix*>& batch) {
    if (batch.empty()) throw std::invalid_argument("Network: empty batch");
    Tensor x = gather_input(batch);
    const std::size_t B = batch.size();
    Tensor feat;
    switch (config_.kind) {
        case ModelKind::Lstm: {
            Tensor states = lstm_->forward(x);
            const std::size_t S = states.dim(1), h = states.dim(2);
            feat = Tensor({B, h});
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t j = 0; j < h; ++j) feat.at(b, j) = states.at(b, S - 1, j);
            break;
        }
        case ModelKind::LstmAttention: {
            Tensor states = lstm_->forward(x);
            feat = attention_->forward(states);
            break;
        }
        case ModelKind::Cnn: {
            Tensor y = x;
            for (std::size_t s = 0; s < convs_.size(); ++s) {
                y = convs_[s].forward(y);
                if (pool_after_[s]) y = pools_[s].forward(y);
            }
            flat_shape_ = y.shape();
            feat = Tensor({B, y.dim(1) * y.dim(2)});
            std::memcpy(feat.data(), y.data(), y.size() * sizeof(double));
            break;
        }
    }
    Tensor hid = hidden_->forward(feat);
    Tensor p = out_->forward(hid);
    std::vector<double> probs(B);
    for (std::size_t b = 0; b < B; ++b) probs[b] = p.at(b, 0);
    return probs;
}

void Network::backward(const std::vector<double>& dprob) {
    const std::size_t B = batch_B_;
    if (dprob.size() != B) throw std::invalid_argument("Network: ShapeMismatch in backward");
    Tensor dp({B, 1});
    for (std::size_t b = 0; b < B; ++b) dp.at(b, 0) = dprob[b];
    Tensor dhid = out_->backward(dp);
    Tensor dfeat = hidden_->backward(dhid);

    Tensor dx;
    switch (config_.kind) {
        case ModelKind::Lstm: {
            const std::size_t S = config_.seq_len, h = dfeat.dim(1);
            Tensor dstates({B, S, h});
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t j = 0; j < h; ++j) dstates.at(b, S - 1, j) = dfeat.at(b, j);
            dx = lstm_->backward(dstates);
            break;
        }
        case ModelKind::LstmAttention: {
            Tensor dstates = attention_->backward(dfeat);
            dx = lstm_->backward(dstates);
            break;
        }
        case ModelKind::Cnn: {
            Tensor dy(flat_shape_);
            std::memcpy(dy.data(), dfeat.data(), dfeat.size() * sizeof(double));
            for (std::size_t s = convs_.size(); s-- > 0;) {
                if (pool_after_[s]) dy = pools_[s].backward(dy);
                dy = convs_[s].backward(dy);
            }
            dx = dy;
            break;
        }
    }
    scatter_input_grad(dx);
}

std::vector<Parameter*> Network::parameters() {
    std::vector<Parameter*> ps;
    for (auto& e : embeddings_) ps.push_back(&e.param());
    if (lstm_) {
        ps.push_back(&lstm_->input_kernel());
        ps.push_back(&lstm_->recurrent_kernel());
        ps.push_back(&lstm_->gate_bias());
    }
    if (attention_) {
        ps.push_back(&attention_->score_kernel());
        ps.push_back(&attention_->score_query());
    }
    for (auto& c : convs_) {
        ps.push_back(&c.kernel());
        ps.push_back(&c.bias());
    }
    if (hidden_) {
        ps.push_back(&hidden_->weight());
        ps.push_back(&hidden_->bias());
    }
    if (out_) {
        ps.push_back(&out_->weight());
        ps.push_back(&out_->bias());
    }
    return ps;
}

void Network::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

std::vector<Tensor> Network::snapshot() const {
    std::vector<Tensor> snap;
    for (Parameter* p : const_cast<Network*>(this)->parameters()) snap.push_back(p->value);
    return snap;
}

void Network::restore(const std::vector<Tensor>& snap) {
    auto ps = parameters();
    if (snap.size() != ps.size()) throw std::invalid_argument("Network: snapshot mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = snap[i];
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (Parameter* p : const_cast<Network*>(this)->parameters()) n += p->value.size();
    return n;
}

namespace {

constexpr std::uint32_t kModelMagic = 0x50504d4e; // "PPMN"
constexpr std::uint32_t kModelVersion = 1;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("Network::load: truncated stream");
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    auto n = get<std::uint64_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("Network::load: truncated stream");
    return s;
}

} // namespace

void Network::save(std::ostream& out) const {
    put(out, kModelMagic);
    put(out, kModelVersion);
    const std::string cfg = config_.to_text();
    put<std::uint64_t>(out, fnv1a(cfg));
    put_string(out, cfg);
    put<std::uint64_t>(out, schema_.cat_cols.size());
    for (const auto& c : schema_.cat_cols) {
        put_string(out, c.name);
        put<std::uint64_t>(out, c.vocab);
        put<std::uint64_t>(out, c.embed_dim);
    }
    put<std::uint64_t>(out, schema_.n_range);

    auto ps = const_cast<Network*>(this)->parameters();
    put<std::uint64_t>(out, ps.size());
    for (Parameter* p : ps) {
        put_string(out, p->name);
        put<std::uint64_t>(out, p->value.shape().size());
        for (std::size_t d : p->value.shape()) put<std::uint64_t>(out, d);
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    }
}

std::unique_ptr<Network> Network::load(std::istream& in) {
    if (get<std::uint32_t>(in) != kModelMagic) throw std::runtime_error("Network::load: bad magic");
    if (get<std::uint32_t>(in) != kModelVersion)
        throw std::runtime_error("Network::load: bad version");
    std::uint64_t cfg_hash = get<std::uint64_t>(in);
    std::string cfg = get_string(in);
    if (fnv1a(cfg) != cfg_hash) throw std::runtime_error("Network::load: config hash mismatch");
    ModelConfig config = ModelConfig::from_text(cfg);
    EncodedSchema schema;
    std::uint64_t n_cat = get<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < n_cat; ++i) {
        EncodedSchema::CatCol c;
        c.name = get_string(in);
        c.vocab = get<std::uint64_t>(in);
        c.embed_dim = get<std::uint64_t>(in);
        schema.cat_cols.push_back(std::move(c));
    }
    schema.n_range = get<std::uint64_t>(in);

    auto net = std::make_unique<Network>(config, schema);
    auto ps = net->parameters();
    std::uint64_t n_params = get<std::uint64_t>(in);
    if (n_params != ps.size()) throw std::runtime_error("Network::load: parameter count mismatch");
    for (Parameter* p : ps) {
        std::string name = get_string(in);
        if (name != p->name) throw std::runtime_error("Network::load: parameter order mismatch");
        std::uint64_t rank = get<std::uint64_t>(in);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = get<std::uint64_t>(in);
        if (shape != p->value.shape()) throw std::runtime_error("Network::load: shape mismatch");
        in.read(reinterpret_cast<char*>(p->value.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(double)));
        if (!in) throw std::runtime_error("Network::load: truncated stream");
    }
    return net;
}

} // namespace ppm

#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppm/features.hpp"
#include "ppm/layers.hpp"
#include "ppm/prefixes.hpp"

namespace ppm {

enum class ModelKind { Lstm, LstmAttention, Cnn };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ModelConfig {
    ModelKind kind = ModelKind::Lstm;
    std::size_t seq_len = 15;
    std::size_t batch_size = 128;      // paper grid: 128/256/512/1024
    std::size_t size_multiplier = 1;   // paper grid: 1..16
    std::size_t kernel_size = 3;       // cnn only
    std::uint64_t seed = 0;
    std::size_t max_epochs = 100;
    std::size_t patience = 5;
    double learning_rate = 1e-3;

    void validate() const;
    std::string to_text() const;
    static ModelConfig from_text(const std::string& text);
};

// Post-encoding input description: per-categorical vocabulary sizes with their
// embedding widths, plus the range column count.
struct EncodedSchema {
    struct CatCol {
        std::string name;
        std::size_t vocab;
        std::size_t embed_dim;
    };
    std::vector<CatCol> cat_cols;
    std::size_t n_range = 0;

    std::size_t input_width() const;
    static EncodedSchema from(const ColumnLayout& layout, const Encoders& enc);
};

constexpr std::size_t kBaseWidth = 8;

// One of the three architectures, built from a config and the encoded schema.
// Owns all parameters; forward caches activations, so a single instance must
// not run concurrent passes.
class Network {
public:
    Network(const ModelConfig& config, const EncodedSchema& schema);

    std::vector<double> forward(const std::vector<const PrefixMatrix*>& batch);
    void backward(const std::vector<double>& dprob);

    std::vector<double> predict(const std::vector<const PrefixMatrix*>& batch) {
        return forward(batch);
    }

    std::vector<Parameter*> parameters();
    void zero_grad();

    // checkpointing
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& snap);

    const ModelConfig& config() const { return config_; }
    const EncodedSchema& schema() const { return schema_; }
    std::size_t parameter_count() const;
    bool cnn_has_second_stage() const { return convs_.size() > 1; }

    void save(std::ostream& out) const;
    static std::unique_ptr<Network> load(std::istream& in);

private:
    Tensor gather_input(const std::vector<const PrefixMatrix*>& batch);
    void scatter_input_grad(const Tensor& dx);

    ModelConfig config_;
    EncodedSchema schema_;

    std::vector<Embedding> embeddings_;
    std::optional<Lstm> lstm_;
    std::optional<AdditiveAttention> attention_;
    std::vector<Conv1D> convs_;
    std::vector<bool> pool_after_;
    std::vector<MaxPool1D> pools_;
    std::optional<Dense> hidden_;
    std::optional<Dense> out_;

    // forward caches
    std::size_t batch_B_ = 0;
    std::vector<std::size_t> flat_shape_;
};

// Central finite differences over every parameter element against the
// analytic gradients of the bce loss; returns the max relative error.
// The default step balances truncation against rounding noise for losses of
// order one in double precision.
double grad_check(Network& net, const std::vector<const PrefixMatrix*>& batch,
                  const std::vector<int>& targets, double h = 1e-4);

// Adds uniform(-scale, scale) noise to every parameter element except the
// pinned embedding padding rows. Freshly built networks have zero biases,
// which places ReLU pre-activations of padding windows exactly on the kink
// where one-sided derivatives disagree; checking gradients at a jittered,
// generic point avoids those measure-zero ties.
void jitter_parameters(Network& net, double scale, std::uint64_t seed);

} // namespace ppm

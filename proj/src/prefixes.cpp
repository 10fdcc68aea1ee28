#include "ppm/prefixes.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ppm {

ColumnLayout ColumnLayout::from_schema(const FeatureSchema& schema) {
    ColumnLayout layout;
    for (const FeatureDecl& f : schema.features) {
        if (f.kind == FeatureKind::Categorical)
            layout.cat_features.push_back(f.name);
        else
            layout.range_features.push_back(f.name);
    }
    return layout;
}

std::vector<PrefixMatrix> window_case(const Case& c, const ColumnLayout& layout,
                                      std::size_t seq_len) {
    if (c.events.empty()) throw std::invalid_argument("window_case: empty case");
    if (seq_len < 1) throw std::invalid_argument("window_case: seq_len must be >= 1");
    const std::size_t n_cat = layout.cat_features.size();
    const std::size_t n_range = layout.range_features.size();
    std::vector<PrefixMatrix> out;
    out.reserve(c.events.size());
    for (std::size_t k = 1; k <= c.events.size(); ++k) {
        PrefixMatrix m;
        m.case_id = c.case_id;
        m.target = c.target.value_or(0);
        m.prefix_length = k;
        m.cats.assign(seq_len * n_cat, 0);
        m.ranges.assign(seq_len * n_range, 0.0);
        const std::size_t first = k > seq_len ? k - seq_len + 1 : 1; // 1-based
        const std::size_t count = k - first + 1;
        for (std::size_t r = 0; r < count; ++r) {
            const Event& e = c.events[first - 1 + r];
            const std::size_t row = seq_len - count + r; // bottom-aligned
            for (std::size_t j = 0; j < n_cat; ++j)
                m.cats[row * n_cat + j] =
                    static_cast<std::int32_t>(std::llround(e.number(layout.cat_features[j])));
            for (std::size_t j = 0; j < n_range; ++j)
                m.ranges[row * n_range + j] = e.number(layout.range_features[j]);
        }
        out.push_back(std::move(m));
    }
    return out;
}

PrefixDataset window_log(const EventLog& log, std::size_t seq_len) {
    if (log.cases.empty()) throw std::runtime_error("EmptyLog");
    PrefixDataset ds;
    ds.seq_len = seq_len;
    ds.layout = ColumnLayout::from_schema(log.schema);
    for (const Case& c : log.cases) {
        auto ms = window_case(c, ds.layout, seq_len);
        ds.matrices.insert(ds.matrices.end(), std::make_move_iterator(ms.begin()),
                           std::make_move_iterator(ms.end()));
    }
    return ds;
}

PrefixDataset truncate_to_max_prefix(const PrefixDataset& ds, std::size_t max_prefix) {
    if (max_prefix < 1) throw std::invalid_argument("truncate_to_max_prefix: max_prefix >= 1");
    PrefixDataset out;
    out.seq_len = ds.seq_len;
    out.layout = ds.layout;
    for (const PrefixMatrix& m : ds.matrices)
        if (m.prefix_length <= max_prefix) out.matrices.push_back(m);
    return out;
}

namespace {

constexpr std::uint32_t kMagic = 0x50504453; // "PPDS"
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("load_dataset: truncated stream");
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    auto n = get<std::uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw std::runtime_error("load_dataset: truncated stream");
    return s;
}

} // namespace

void save_dataset(const PrefixDataset& ds, std::ostream& out) {
    put(out, kMagic);
    put(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.seq_len));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.layout.cat_features.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.layout.range_features.size()));
    for (const auto& f : ds.layout.cat_features) put_string(out, f);
    for (const auto& f : ds.layout.range_features) put_string(out, f);
    put<std::uint64_t>(out, ds.matrices.size());
    for (const PrefixMatrix& m : ds.matrices) {
        put_string(out, m.case_id);
        put<std::int32_t>(out, m.target);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(m.prefix_length));
        out.write(reinterpret_cast<const char*>(m.cats.data()),
                  static_cast<std::streamsize>(m.cats.size() * sizeof(std::int32_t)));
        out.write(reinterpret_cast<const char*>(m.ranges.data()),
                  static_cast<std::streamsize>(m.ranges.size() * sizeof(double)));
    }
}

PrefixDataset load_dataset(std::istream& in) {
    if (get<std::uint32_t>(in) != kMagic) throw std::runtime_error("load_dataset: bad magic");
    if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("load_dataset: bad version");
    PrefixDataset ds;
    ds.seq_len = get<std::uint32_t>(in);
    std::size_t n_cat = get<std::uint32_t>(in);
    std::size_t n_range = get<std::uint32_t>(in);
    for (std::size_t i = 0; i < n_cat; ++i) ds.layout.cat_features.push_back(get_string(in));
    for (std::size_t i = 0; i < n_range; ++i) ds.layout.range_features.push_back(get_string(in));
    std::uint64_t count = get<std::uint64_t>(in);
    ds.matrices.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PrefixMatrix m;
        m.case_id = get_string(in);
        m.target = get<std::int32_t>(in);
        m.prefix_length = get<std::uint32_t>(in);
        m.cats.resize(ds.seq_len * n_cat);
        m.ranges.resize(ds.seq_len * n_range);
        in.read(reinterpret_cast<char*>(m.cats.data()),
                static_cast<std::streamsize>(m.cats.size() * sizeof(std::int32_t)));
        in.read(reinterpret_cast<char*>(m.ranges.data()),
                static_cast<std::streamsize>(m.ranges.size() * sizeof(double)));
        if (!in) throw std::runtime_error("load_dataset: truncated stream");
        ds.matrices.push_back(std::move(m));
    }
    return ds;
}

void write_sidecar_index(const PrefixDataset& ds, std::ostream& out) {
    out << "case_id,prefix_length,target\n";
    for (const PrefixMatrix& m : ds.matrices)
        out << m.case_id << "," << m.prefix_length << "," << m.target << "\n";
}

} // namespace ppm

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "ppm/prefixes.hpp"

using namespace ppm;

namespace {

FeatureSchema encoded_schema() {
    FeatureSchema s;
    s.case_id_column = "case";
    s.timestamp_column = "ts";
    s.activity_column = "activity";
    s.timestamp_format = "%Y-%m-%d %H:%M:%S";
    s.features = {{"activity", FeatureKind::Categorical, FeatureSource::Raw},
                  {"amount", FeatureKind::Range, FeatureSource::Raw},
                  {"hour", FeatureKind::Categorical, FeatureSource::Synthetic}};
    return s;
}

// encoded case: activity index = evNr+1, hour index = 2, amount = evNr * 0.5
Case encoded_case(const std::string& cid, std::size_t n_events) {
    Case c;
    c.case_id = cid;
    c.target = 1;
    for (std::size_t i = 0; i < n_events; ++i) {
        Event e;
        e.case_id = cid;
        e.timestamp = static_cast<std::int64_t>(i);
        e.values["activity"] = static_cast<double>(i + 2);
        e.values["hour"] = 2.0;
        e.values["amount"] = 0.5 * static_cast<double>(i + 1);
        c.events.push_back(e);
    }
    return c;
}

} // namespace

TEST_CASE("layout puts categoricals first, then ranges, each in schema order") {
    ColumnLayout layout = ColumnLayout::from_schema(encoded_schema());
    REQUIRE(layout.cat_features.size() == 2);
    REQUIRE(layout.range_features.size() == 1);
    CHECK(layout.cat_features[0] == "activity");
    CHECK(layout.cat_features[1] == "hour");
    CHECK(layout.range_features[0] == "amount");
}

TEST_CASE("16-event case with seq_len 9 yields 16 bottom-aligned windows") {
    ColumnLayout layout = ColumnLayout::from_schema(encoded_schema());
    Case c = encoded_case("c1", 16);
    auto windows = window_case(c, layout, 9);
    REQUIRE(windows.size() == 16);

    for (std::size_t k = 0; k < windows.size(); ++k) {
        const PrefixMatrix& m = windows[k];
        CHECK(m.case_id == "c1");
        CHECK(m.target == 1);
        CHECK(m.prefix_length == k + 1);
        std::size_t real = std::min<std::size_t>(k + 1, 9);
        std::size_t pad = 9 - real;
        // padding rows are all zeros
        for (std::size_t r = 0; r < pad; ++r) {
            CHECK(m.cats[r * 2 + 0] == 0);
            CHECK(m.cats[r * 2 + 1] == 0);
            CHECK(m.ranges[r] == 0.0);
        }
        // bottom row is always event k+1; rows above walk back through history
        for (std::size_t r = pad; r < 9; ++r) {
            std::size_t ev = (k + 1) - real + (r - pad); // 0-based event index
            CHECK(m.cats[r * 2 + 0] == static_cast<std::int32_t>(ev + 2));
            CHECK(m.cats[r * 2 + 1] == 2);
            CHECK(m.ranges[r] == 0.5 * static_cast<double>(ev + 1));
        }
    }
    // spot check matrix 9 (prefix length 9): first real row is event 1
    CHECK(windows[8].cats[0] == 2);
    // matrix 10 drops event 1: first row is event 2
    CHECK(windows[9].cats[0] == 3);
}

TEST_CASE("windows reconstruct the original encoded case") {
    std::mt19937_64 rng(23);
    ColumnLayout layout = ColumnLayout::from_schema(encoded_schema());
    for (int iter = 0; iter < 50; ++iter) {
        std::size_t n = 1 + rng() % 30;
        std::size_t seq = 1 + rng() % 12;
        Case c = encoded_case("c", n);
        // randomize values so reconstruction is meaningful
        std::uniform_real_distribution<double> rd(-2.0, 2.0);
        std::uniform_int_distribution<std::int32_t> id(1, 40);
        for (Event& e : c.events) {
            e.values["activity"] = static_cast<double>(id(rng));
            e.values["hour"] = static_cast<double>(id(rng));
            e.values["amount"] = rd(rng);
        }
        auto windows = window_case(c, layout, seq);
        REQUIRE(windows.size() == n);
        // the bottom row of matrix k is exactly event k
        for (std::size_t k = 0; k < n; ++k) {
            const PrefixMatrix& m = windows[k];
            std::size_t bottom = seq - 1;
            CHECK(m.cats[bottom * 2 + 0] ==
                  static_cast<std::int32_t>(c.events[k].number("activity")));
            CHECK(m.cats[bottom * 2 + 1] ==
                  static_cast<std::int32_t>(c.events[k].number("hour")));
            CHECK(m.ranges[bottom] == c.events[k].number("amount"));
        }
    }
}

TEST_CASE("window_log flattens all cases; truncate_to_max_prefix filters") {
    EventLog log;
    log.schema = encoded_schema();
    log.cases.push_back(encoded_case("c1", 4));
    log.cases.push_back(encoded_case("c2", 7));
    PrefixDataset ds = window_log(log, 5);
    CHECK(ds.seq_len == 5);
    CHECK(ds.matrices.size() == 11);

    PrefixDataset cut = truncate_to_max_prefix(ds, 3);
    CHECK(cut.matrices.size() == 6);
    for (const auto& m : cut.matrices) CHECK(m.prefix_length <= 3);
}

TEST_CASE("dataset binary round-trip and sidecar index") {
    EventLog log;
    log.schema = encoded_schema();
    log.cases.push_back(encoded_case("c1", 3));
    log.cases.push_back(encoded_case("c2", 5));
    log.cases[1].target = 0;
    PrefixDataset ds = window_log(log, 4);

    std::stringstream bin;
    save_dataset(ds, bin);
    PrefixDataset back = load_dataset(bin);
    CHECK(back.seq_len == ds.seq_len);
    CHECK(back.layout == ds.layout);
    REQUIRE(back.matrices.size() == ds.matrices.size());
    for (std::size_t i = 0; i < ds.matrices.size(); ++i) {
        CHECK(back.matrices[i].case_id == ds.matrices[i].case_id);
        CHECK(back.matrices[i].target == ds.matrices[i].target);
        CHECK(back.matrices[i].prefix_length == ds.matrices[i].prefix_length);
        CHECK(back.matrices[i].cats == ds.matrices[i].cats);
        CHECK(back.matrices[i].ranges == ds.matrices[i].ranges);
    }

    std::ostringstream side;
    write_sidecar_index(ds, side);
    std::istringstream lines(side.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "case_id,prefix_length,target");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == ds.matrices.size());
}

TEST_CASE("corrupt stream is rejected") {
    std::stringstream bad("not a dataset");
    CHECK_THROWS(load_dataset(bad));
}

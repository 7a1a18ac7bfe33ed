#include "amgae/dataset.hpp"

#include "amgae/binio.hpp"
#include "amgae/convert.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace amgae;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("amgae_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_SUITE("dataset") {
    TEST_CASE("node dataset round-trips through write and load") {
        TempDir dir("node_roundtrip");
        RngStream rng(3);
        Graph g = testutil::make_random_graph(12, 0.3, 4, rng);
        std::vector<std::int32_t> labels;
        SplitMasks splits;
        for (index_t i = 0; i < 12; ++i) {
            labels.push_back(static_cast<std::int32_t>(i % 3));
            splits.train.push_back(i < 4);
            splits.val.push_back(i >= 4 && i < 8);
            splits.test.push_back(i >= 8);
        }
        Graph full = Graph::from_edges(12, g.undirected_edge_list(), g.features(), labels,
                                       splits);
        write_node_dataset(dir.path, full);
        Graph loaded = load_node_dataset(dir.path);

        CHECK(loaded.num_nodes() == 12);
        CHECK(loaded.num_edges() == full.num_edges());
        CHECK(loaded.csr_offsets() == full.csr_offsets());
        CHECK(loaded.csr_targets() == full.csr_targets());
        REQUIRE(loaded.labels().has_value());
        CHECK(*loaded.labels() == labels);
        REQUIRE(loaded.splits().has_value());
        CHECK(loaded.splits()->train == splits.train);
        CHECK(loaded.splits()->test == splits.test);
        for (index_t i = 0; i < full.features().size(); ++i)
            CHECK(loaded.features().data()[i] == doctest::Approx(full.features().data()[i]));
    }

    TEST_CASE("single-edge directory loads per the documented format") {
        TempDir dir("node_tiny");
        write_text(dir.path / "edges.tsv", "0\t1\n");
        write_text(dir.path / "features.csv", "1.0,0.0\n0.0,1.0\n");
        write_text(dir.path / "labels.txt", "0\n1\n");
        write_text(dir.path / "splits.json",
                   R"({"train": [0], "val": [], "test": [1]})");
        Graph g = load_node_dataset(dir.path);
        CHECK(g.num_nodes() == 2);
        CHECK(g.num_edges() == 1);
        CHECK(g.feature_dim() == 2);
        REQUIRE(g.neighbors(0).size() == 1);
        CHECK(g.neighbors(0)[0] == 1);
        CHECK(g.neighbors(1)[0] == 0);
    }

    TEST_CASE("missing files and malformed rows produce clear errors") {
        TempDir dir("node_errors");
        CHECK_THROWS_WITH_AS(load_node_dataset(dir.path),
                             doctest::Contains("missing dataset file"), std::runtime_error);

        write_text(dir.path / "features.csv", "1.0,2.0\n3.0\n");
        write_text(dir.path / "edges.tsv", "");
        CHECK_THROWS_WITH_AS(load_node_dataset(dir.path), doctest::Contains("fields"),
                             std::runtime_error);
    }

    TEST_CASE("overlapping splits are rejected") {
        TempDir dir("node_overlap");
        write_text(dir.path / "edges.tsv", "0\t1\n");
        write_text(dir.path / "features.csv", "1\n1\n");
        write_text(dir.path / "labels.txt", "0\n0\n");
        write_text(dir.path / "splits.json", R"({"train": [0], "val": [0], "test": []})");
        CHECK_THROWS_WITH_AS(load_node_dataset(dir.path),
                             doctest::Contains("multiple splits"), std::runtime_error);
    }

    TEST_CASE("graph dataset with a single triangle") {
        TempDir dir("graph_triangle");
        write_text(dir.path / "graph_indicator.txt", "0\n0\n0\n");
        write_text(dir.path / "edges.tsv", "0\t1\n1\t2\n2\t0\n");
        write_text(dir.path / "graph_labels.txt", "0\n");
        GraphCollection coll = load_graph_dataset(dir.path);
        REQUIRE(coll.graphs.size() == 1);
        CHECK(coll.graphs[0].num_nodes() == 3);
        CHECK(coll.graphs[0].num_edges() == 3);
        CHECK(coll.num_classes == 1);
        // no features.csv -> degree one-hot; triangle degrees are all 2
        CHECK(coll.graphs[0].feature_dim() == 3);
        CHECK(coll.graphs[0].features().at(0, 2) == 1.0);
        CHECK(coll.graphs[0].features().at(0, 0) == 0.0);
    }

    TEST_CASE("graph dataset round-trips and keeps labels aligned") {
        TempDir dir("graph_roundtrip");
        RngStream rng(9);
        GraphCollection coll;
        for (int i = 0; i < 5; ++i) {
            coll.graphs.push_back(
                testutil::make_random_graph(3 + static_cast<index_t>(rng.next_below(4)), 0.5, 2, rng));
            coll.graph_labels.push_back(i % 2);
        }
        coll.num_classes = 2;
        write_graph_dataset(dir.path, coll);
        GraphCollection loaded = load_graph_dataset(dir.path);
        REQUIRE(loaded.graphs.size() == 5);
        CHECK(loaded.graph_labels == coll.graph_labels);
        CHECK(loaded.num_classes == 2);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(loaded.graphs[i].num_nodes() == coll.graphs[i].num_nodes());
            CHECK(loaded.graphs[i].num_edges() == coll.graphs[i].num_edges());
        }
    }

    TEST_CASE("dangling graph ids are rejected") {
        TempDir dir("graph_dangling");
        write_text(dir.path / "graph_indicator.txt", "0\n2\n");  // graph 1 has no nodes
        write_text(dir.path / "edges.tsv", "");
        write_text(dir.path / "graph_labels.txt", "0\n1\n1\n");
        CHECK_THROWS_WITH_AS(load_graph_dataset(dir.path), doctest::Contains("dangling"),
                             std::runtime_error);
    }

    TEST_CASE("graph label count mismatch is rejected") {
        TempDir dir("graph_labelcount");
        write_text(dir.path / "graph_indicator.txt", "0\n0\n1\n1\n");
        write_text(dir.path / "edges.tsv", "0\t1\n2\t3\n");
        write_text(dir.path / "graph_labels.txt", "0\n");
        CHECK_THROWS_WITH_AS(load_graph_dataset(dir.path), doctest::Contains("graph_labels"),
                             std::runtime_error);
    }
}

TEST_SUITE("convert") {
    TEST_CASE("content-cites conversion produces the canonical layout") {
        TempDir dir("cc");
        write_text(dir.path / "toy.content",
                   "p3\t1\t0\t0\tphysics\n"
                   "p1\t0\t1\t0\tbiology\n"
                   "p2\t0\t0\t1\tphysics\n");
        write_text(dir.path / "toy.cites",
                   "p1\tp2\n"
                   "p2\tp3\n"
                   "p9\tp1\n");  // dangling: p9 unknown
        fs::path out = dir.path / "out";
        ContentCitesStats stats = convert_content_cites(dir.path / "toy.content",
                                                        dir.path / "toy.cites", out,
                                                        /*train_per_class=*/1, /*val=*/0,
                                                        /*test=*/1, /*seed=*/7);
        CHECK(stats.num_nodes == 3);
        CHECK(stats.num_edges == 2);
        CHECK(stats.feature_dim == 3);
        CHECK(stats.num_classes == 2);
        CHECK(stats.dangling_citations == 1);

        Graph g = load_node_dataset(out);
        CHECK(g.num_nodes() == 3);
        // classes sorted: biology=0, physics=1; file order p3,p1,p2
        REQUIRE(g.labels().has_value());
        CHECK((*g.labels())[0] == 1);
        CHECK((*g.labels())[1] == 0);
        CHECK((*g.labels())[2] == 1);
        // features follow content file order
        CHECK(g.features().at(0, 0) == 1.0);
        CHECK(g.features().at(1, 1) == 1.0);
    }

    TEST_CASE("stratified splits are disjoint with the requested sizes") {
        std::vector<std::int32_t> labels;
        for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
        labels.push_back(-1);  // unlabeled
        SplitMasks m = make_stratified_splits(labels, 5, 10, 20, 11);

        auto count = [](const std::vector<std::uint8_t>& mask) {
            index_t c = 0;
            for (auto b : mask) c += b;
            return c;
        };
        CHECK(count(m.train) == 15);
        CHECK(count(m.val) == 10);
        CHECK(count(m.test) == 20);
        CHECK(m.train.back() == 0);  // unlabeled node assigned nowhere
        CHECK(m.val.back() == 0);
        CHECK(m.test.back() == 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            CHECK(m.train[i] + m.val[i] + m.test[i] <= 1);

        // per-class train counts
        std::vector<int> per_class(3, 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (m.train[i]) ++per_class[static_cast<std::size_t>(labels[i])];
        for (int c : per_class) CHECK(c == 5);
    }

    TEST_CASE("TU-style conversion remaps 1-based ids and -1/1 labels") {
        TempDir dir("tu");
        // two graphs: an edge (nodes 1,2) and a triangle (nodes 3,4,5)
        write_text(dir.path / "TOY_A.txt", "1, 2\n2, 1\n3, 4\n4, 3\n4, 5\n5, 4\n3, 5\n5, 3\n");
        write_text(dir.path / "TOY_graph_indicator.txt", "1\n1\n2\n2\n2\n");
        write_text(dir.path / "TOY_graph_labels.txt", "-1\n1\n");
        write_text(dir.path / "TOY_node_labels.txt", "0\n0\n1\n1\n2\n");
        fs::path out = dir.path / "out";
        TuStats stats = convert_tu(dir.path, "TOY", out);
        CHECK(stats.num_graphs == 2);
        CHECK(stats.num_classes == 2);
        CHECK(stats.total_nodes == 5);
        CHECK(stats.total_edges == 4);
        CHECK(stats.has_features);

        GraphCollection coll = load_graph_dataset(out);
        REQUIRE(coll.graphs.size() == 2);
        CHECK(coll.graph_labels[0] == 0);  // -1 -> 0
        CHECK(coll.graph_labels[1] == 1);
        CHECK(coll.graphs[0].num_edges() == 1);
        CHECK(coll.graphs[1].num_edges() == 3);
        CHECK(coll.graphs[0].feature_dim() == 3);  // one-hot node labels {0,1,2}
    }
}

TEST_SUITE("binio") {
    TEST_CASE("checksummed files round-trip and detect corruption") {
        TempDir dir("binio");
        fs::path p = dir.path / "blob.bin";
        std::string body;
        binio::put_u64(body, 0xDEADBEEFCAFEF00DULL);
        binio::put_f64(body, 3.25);
        binio::put_string(body, "hello");
        binio::write_file_checksummed(p, body);

        std::string back = binio::read_file_checksummed(p);
        binio::Reader r(back);
        CHECK(r.u64() == 0xDEADBEEFCAFEF00DULL);
        CHECK(r.f64() == 3.25);
        CHECK(r.string() == "hello");
        CHECK(r.at_end());

        // flip one byte -> checksum failure
        std::string bytes = binio::read_file(p);
        bytes[3] = static_cast<char>(bytes[3] ^ 0x40);
        binio::write_file_atomic(p, bytes);
        CHECK_THROWS_WITH_AS(binio::read_file_checksummed(p), doctest::Contains("checksum"),
                             std::runtime_error);

        // truncation detected too
        binio::write_file_atomic(p, std::string_view(bytes.data(), 2));
        CHECK_THROWS(binio::read_file_checksummed(p));
    }

    TEST_CASE("reader rejects out-of-bounds reads") {
        std::string body;
        binio::put_u32(body, 7);
        binio::Reader r(body);
        CHECK(r.u32() == 7);
        CHECK_THROWS_WITH_AS(r.u64(), doctest::Contains("past end"), std::runtime_error);
    }
}

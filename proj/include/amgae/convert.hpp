#pragma once

#include "amgae/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace amgae {

// Stratified Planetoid-style split: train_per_class labeled nodes per class,
// then val_count / test_count drawn from the remaining labeled nodes, all via
// one seeded shuffle. Unlabeled nodes (-1) are never assigned.
SplitMasks make_stratified_splits(const std::vector<std::int32_t>& labels,
                                  index_t train_per_class, index_t val_count,
                                  index_t test_count, std::uint64_t seed);

struct ContentCitesStats {
    index_t num_nodes = 0;
    index_t num_edges = 0;
    index_t feature_dim = 0;
    index_t num_classes = 0;
    index_t dangling_citations = 0;  // cites lines naming unknown papers (skipped)
};

// Converts the citation-network "content/cites" distribution (one .content
// line = id, bag-of-words, class name; one .cites line = cited, citing) into
// the canonical node-dataset directory, generating splits.json.
ContentCitesStats convert_content_cites(const std::filesystem::path& content_file,
                                        const std::filesystem::path& cites_file,
                                        const std::filesystem::path& out_dir,
                                        index_t train_per_class, index_t val_count,
                                        index_t test_count, std::uint64_t split_seed);

struct TuStats {
    index_t num_graphs = 0;
    index_t num_classes = 0;
    index_t total_nodes = 0;
    index_t total_edges = 0;
    double avg_nodes = 0.0;
    bool has_features = false;
};

// Converts a TU-style directory (DS_A.txt, DS_graph_indicator.txt,
// DS_graph_labels.txt, optional DS_node_attributes.txt / DS_node_labels.txt,
// all 1-based) into the canonical graph-dataset directory. Node attributes are
// copied as features; node labels become one-hot features; with neither, no
// features.csv is written and the loader's degree surrogate applies.
TuStats convert_tu(const std::filesystem::path& input_dir, const std::string& name,
                   const std::filesystem::path& out_dir);

}  // namespace amgae

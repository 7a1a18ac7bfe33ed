#pragma once

#include "amgae/graph.hpp"

#include <filesystem>

namespace amgae {

// Canonical node-task dataset directory:
//   edges.tsv      two 0-based integer columns per line
//   features.csv   N rows of d_f comma-separated reals
//   labels.txt     N integers, -1 = unlabeled
//   splits.json    {"train": [...], "val": [...], "test": [...]} node ids
Graph load_node_dataset(const std::filesystem::path& dir);

// Canonical graph-task dataset directory:
//   graph_indicator.txt  node -> 0-based graph id, one per line
//   edges.tsv            global 0-based node ids
//   graph_labels.txt     one 0-based label per graph
//   features.csv         optional; absent -> degree one-hot surrogate,
//                        degrees clipped at max_degree_onehot
GraphCollection load_graph_dataset(const std::filesystem::path& dir,
                                   index_t max_degree_onehot = 400);

// Writers emit exactly the formats above (used by `prepare` and by tests).
void write_node_dataset(const std::filesystem::path& dir, const Graph& g);
void write_graph_dataset(const std::filesystem::path& dir, const GraphCollection& coll);

}  // namespace amgae

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphflow/graph.hpp"

namespace graphflow {

struct Split {
  std::vector<bool> train;
  std::vector<bool> val;
  std::vector<bool> test;
  std::uint64_t seed = 0;

  bool empty() const { return train.empty(); }
};

std::size_t count(const std::vector<bool>& mask);

struct Dataset {
  std::string name;
  SparseGraph graph;
  FeatureMatrix features;
  std::vector<int> labels;  // kUnknownLabel for unlabeled nodes
  int n_classes = 0;
  Split split;

  std::size_t n_nodes() const { return graph.n_nodes(); }
  std::size_t feature_dim() const { return features.cols; }
};

// Reads meta.json, edges.tsv, features.tsv and labels.tsv (absent file or
// absent nodes mean unlabeled). The split is left empty.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes the same layout; non-loop edges are emitted once per pair.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Random partition of the labeled nodes. Validation and test receive
// floor(ratio * m) nodes each, training gets the remainder.
Split make_split(const Dataset& dataset, std::array<double, 3> ratios, std::uint64_t seed);

// Partition with absolute train/val sizes; the remaining labeled nodes
// form the test set.
Split make_split_counts(const Dataset& dataset, std::size_t n_train, std::size_t n_val, std::uint64_t seed);

// Uniform random graph with floor(n * avg_degree / 2) distinct non-loop
// edges, one-hot identity features and every label 0 (two classes).
Dataset synth_random_graph(std::size_t n, double avg_degree, std::uint64_t seed);

// Zachary's karate club: 34 nodes, 78 edges, factions as classes.
Dataset karate_club();

// Adds `count` edges drawn uniformly from the absent pairs with differing
// labels.
Dataset add_noise_edges(const Dataset& dataset, std::size_t count, std::uint64_t seed);

}  // namespace graphflow

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrl/model.hpp"

namespace rrl {

// Nested logical expression over u0 leaves. Leaves are binarization-layer
// indicator nodes or one-hot binary feature nodes.
struct Expr {
    enum class Kind { True, False, Leaf, And, Or };
    Kind kind = Kind::True;
    std::size_t leaf = 0;  // u0 node index, Kind::Leaf only
    std::vector<Expr> children;

    bool evaluate(const BitVec& u0) const;
    std::size_t leaf_count() const;
};

// Logical identities only (flatten, dedup, sort, constant-fold, collapse
// singletons), so the canonical form evaluates identically on every input.
Expr canonicalize(const Expr& e);
std::string expr_key(const Expr& e);

// One linear-head input node as a rule: its expression over original
// features plus its per-class linear weights.
struct Rule {
    std::size_t layer = 0;  // 1-based logical layer
    std::size_t index = 0;  // output index within the layer (conj half first)
    bool is_conj = true;
    std::size_t col = 0;  // column in the linear-layer input concat
    Expr expr;
    std::vector<double> weights;  // per class

    double max_abs_weight() const;
};

struct RuleSet {
    std::vector<Rule> rules;  // descending max |weight|, stable by (layer, index)
    std::vector<double> bias;  // per class; includes folded constant nodes
    std::vector<std::string> class_names;
    std::size_t edge_count = 0;
    double avg_rule_length = 0.0;
};

// Constancy (over a training split) and linear-head reachability per node.
// Nodes that are constant, or that no path of selected edges connects to a
// linear weight above 1e-6, are dead: excluded from extraction and metrics.
struct PruneInfo {
    std::vector<std::uint8_t> u0_constant;
    std::vector<std::uint8_t> u0_value;
    std::vector<std::vector<std::uint8_t>> node_constant;  // per layer
    std::vector<std::vector<std::uint8_t>> node_value;
    std::vector<std::vector<std::uint8_t>> node_reachable;

    bool live_u0(std::size_t j) const { return !u0_constant[j]; }
    bool live_node(std::size_t layer, std::size_t i) const {
        return !node_constant[layer][i] && node_reachable[layer][i];
    }
};

PruneInfo prune_dead_nodes(const RRLModel& model, const EncodedDataset& train);

// Walks the discrete weight matrices into rule expressions. Without prune
// info the result is exact on every possible instance: all nodes are kept
// (structurally constant ones as TRUE/FALSE expressions) and bias is the
// model bias. With prune info, dead nodes are folded into the bias at their
// training-split constant and exactness is guaranteed on that split.
RuleSet extract(const RRLModel& model, const PruneInfo* prune = nullptr);

// Merges rules with identical canonical expressions, summing weights.
RuleSet eliminate_redundant(const RuleSet& rs);

// Active connections in the discrete logical layers between live nodes.
// Binarization-layer thresholds are not learned edges and never count.
std::size_t edge_count(const RRLModel& model, const PruneInfo& prune);

// Mean leaf-literal count per rule.
double avg_rule_length(const RuleSet& rs);

// u0 indicators for one instance (binarize(C) ⊕ B).
BitVec encode_u0(const RRLModel& model, std::span<const double> c_row,
                 const std::uint8_t* b_row);

// Class scores: bias plus the weights of fired rules, accumulated in linear
// column order so they reproduce forward_discrete logits.
std::vector<double> rule_scores(const RuleSet& rs, const BitVec& u0);

// Rendered expression over feature names ("age > 30 AND job == manager").
std::string rule_text(const RRLModel& model, const Expr& expr);

// Per-class top-n report with weights and complexity metrics.
std::string explain(const RRLModel& model, const RuleSet& rs, std::size_t top_n);

// Expression trees, weights (raw and max-normalized), and metrics.
std::string ruleset_to_json(const RRLModel& model, const RuleSet& rs);

}  // namespace rrl

#include "rrl/rules.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "rrl/binarization.hpp"

namespace rrl {

namespace {

constexpr double kReachabilityCutoff = 1e-6;

struct NodeRef {
    std::size_t layer;  // 0 = u0
    std::size_t index;
};

// Column of node (layer >= 1, output index i) in the linear input concat.
std::size_t concat_col(const RRLModel& model, std::size_t layer, std::size_t i) {
    std::size_t col = 0;
    for (std::size_t l = 1; l < layer; ++l) col += model.layers[l - 1].n_out();
    return col + i;
}

// Binary-source name for a u0 node past the binarization block.
std::string binary_node_text(const DatasetSchema& schema, std::size_t offset) {
    for (const auto& f : schema.features) {
        if (f.kind != FeatureKind::Discrete) continue;
        if (offset < f.categories.size()) {
            return f.name + " == " + f.categories[offset];
        }
        offset -= f.categories.size();
    }
    throw ModelError("binary node index out of range");
}

std::vector<std::string> continuous_names(const DatasetSchema& schema) {
    std::vector<std::string> names;
    for (const auto& f : schema.features) {
        if (f.kind == FeatureKind::Continuous) names.push_back(f.name);
    }
    return names;
}

std::string leaf_text(const RRLModel& model, std::size_t u0_index) {
    const std::size_t bin_width = model.bounds.output_width();
    if (u0_index < bin_width) {
        const auto names = continuous_names(model.schema);
        return literal_text(model.bounds, u0_index, names);
    }
    return binary_node_text(model.schema, u0_index - bin_width);
}

std::string render(const RRLModel& model, const Expr& e, bool parenthesize) {
    switch (e.kind) {
        case Expr::Kind::True:
            return "TRUE";
        case Expr::Kind::False:
            return "FALSE";
        case Expr::Kind::Leaf:
            return leaf_text(model, e.leaf);
        case Expr::Kind::And:
        case Expr::Kind::Or: {
            const char* op = e.kind == Expr::Kind::And ? " AND " : " OR ";
            std::string out;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += op;
                const bool child_compound =
                    e.children[i].kind == Expr::Kind::And ||
                    e.children[i].kind == Expr::Kind::Or;
                out += render(model, e.children[i], child_compound);
            }
            if (parenthesize) return "(" + out + ")";
            return out;
        }
    }
    return {};
}

nlohmann::json expr_to_json(const RRLModel& model, const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::True:
            return {{"op", "true"}};
        case Expr::Kind::False:
            return {{"op", "false"}};
        case Expr::Kind::Leaf:
            return {{"op", "leaf"},
                    {"node", e.leaf},
                    {"text", leaf_text(model, e.leaf)}};
        case Expr::Kind::And:
        case Expr::Kind::Or: {
            nlohmann::json kids = nlohmann::json::array();
            for (const auto& c : e.children) kids.push_back(expr_to_json(model, c));
            return {{"op", e.kind == Expr::Kind::And ? "and" : "or"},
                    {"children", kids}};
        }
    }
    return {};
}

void sort_by_weight(std::vector<Rule>& rules) {
    std::stable_sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
        const double wa = a.max_abs_weight(), wb = b.max_abs_weight();
        if (wa != wb) return wa > wb;
        return a.col < b.col;
    });
}

}  // namespace

bool Expr::evaluate(const BitVec& u0) const {
    switch (kind) {
        case Kind::True:
            return true;
        case Kind::False:
            return false;
        case Kind::Leaf:
            return u0.get(leaf);
        case Kind::And:
            for (const auto& c : children) {
                if (!c.evaluate(u0)) return false;
            }
            return true;
        case Kind::Or:
            for (const auto& c : children) {
                if (c.evaluate(u0)) return true;
            }
            return false;
    }
    return false;
}

std::size_t Expr::leaf_count() const {
    if (kind == Kind::Leaf) return 1;
    std::size_t n = 0;
    for (const auto& c : children) n += c.leaf_count();
    return n;
}

std::string expr_key(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::True:
            return "T";
        case Expr::Kind::False:
            return "F";
        case Expr::Kind::Leaf:
            return "L" + std::to_string(e.leaf);
        case Expr::Kind::And:
        case Expr::Kind::Or: {
            std::string key = e.kind == Expr::Kind::And ? "A(" : "O(";
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) key += ',';
                key += expr_key(e.children[i]);
            }
            return key + ")";
        }
    }
    return {};
}

Expr canonicalize(const Expr& e) {
    if (e.kind != Expr::Kind::And && e.kind != Expr::Kind::Or) return e;
    const bool is_and = e.kind == Expr::Kind::And;
    const Expr::Kind absorbing = is_and ? Expr::Kind::False : Expr::Kind::True;
    const Expr::Kind neutral = is_and ? Expr::Kind::True : Expr::Kind::False;

    std::vector<Expr> kids;
    for (const auto& child : e.children) {
        Expr c = canonicalize(child);
        if (c.kind == absorbing) return Expr{absorbing, 0, {}};
        if (c.kind == neutral) continue;
        if (c.kind == e.kind) {
            // Same-operator children are already canonical; splice them in.
            for (auto& gc : c.children) kids.push_back(std::move(gc));
        } else {
            kids.push_back(std::move(c));
        }
    }
    std::vector<std::pair<std::string, std::size_t>> keyed;
    keyed.reserve(kids.size());
    for (std::size_t i = 0; i < kids.size(); ++i) keyed.emplace_back(expr_key(kids[i]), i);
    std::sort(keyed.begin(), keyed.end());

    Expr out;
    out.kind = e.kind;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i && keyed[i].first == keyed[i - 1].first) continue;
        out.children.push_back(std::move(kids[keyed[i].second]));
    }
    if (out.children.empty()) return Expr{neutral, 0, {}};
    if (out.children.size() == 1) return std::move(out.children[0]);
    return out;
}

double Rule::max_abs_weight() const {
    double m = 0.0;
    for (double w : weights) m = std::max(m, std::fabs(w));
    return m;
}

BitVec encode_u0(const RRLModel& model, std::span<const double> c_row,
                 const std::uint8_t* b_row) {
    const std::size_t bin_width = model.bounds.output_width();
    const std::size_t b_width = model.schema.binary_width();
    BitVec u0(bin_width + b_width);
    binarize_bits(model.bounds, c_row, u0, 0);
    for (std::size_t j = 0; j < b_width; ++j) {
        if (b_row[j]) u0.set(bin_width + j, true);
    }
    return u0;
}

PruneInfo prune_dead_nodes(const RRLModel& model, const EncodedDataset& train) {
    const DiscreteWeights disc = binarize_params(model);
    const std::size_t n_layers = model.layers.size();
    const std::size_t u0_width = model.input_width();
    const std::size_t m_cont = model.schema.n_continuous();

    PruneInfo info;
    info.u0_constant.assign(u0_width, 1);
    info.u0_value.assign(u0_width, 0);
    info.node_constant.resize(n_layers);
    info.node_value.resize(n_layers);
    info.node_reachable.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        info.node_constant[l].assign(model.layers[l].n_out(), 1);
        info.node_value[l].assign(model.layers[l].n_out(), 0);
        info.node_reachable[l].assign(model.layers[l].n_out(), 0);
    }

    // Constancy over the training split.
    bool first = true;
    for (std::size_t i = 0; i < train.size(); ++i) {
        BitVec u = encode_u0(model, {train.c.row(i), m_cont}, train.b_row(i));
        for (std::size_t j = 0; j < u0_width; ++j) {
            const std::uint8_t v = u.get(j);
            if (first) {
                info.u0_value[j] = v;
            } else if (info.u0_value[j] != v) {
                info.u0_constant[j] = 0;
            }
        }
        for (std::size_t l = 0; l < n_layers; ++l) {
            BitVec out = layer_forward_discrete(disc.layers[l], u);
            for (std::size_t k = 0; k < out.n; ++k) {
                const std::uint8_t v = out.get(k);
                if (first) {
                    info.node_value[l][k] = v;
                } else if (info.node_value[l][k] != v) {
                    info.node_constant[l][k] = 0;
                }
            }
            u = std::move(out);
        }
        first = false;
    }
    for (std::size_t j = 0; j < u0_width; ++j) {
        if (!info.u0_constant[j]) info.u0_value[j] = 0;
    }

    // Reachability from linear weights above the cutoff, walking selected
    // edges top-down.
    for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t i = 0; i < model.layers[l].n_out(); ++i) {
            const std::size_t col = concat_col(model, l + 1, i);
            for (std::size_t cls = 0; cls < model.n_classes(); ++cls) {
                if (std::fabs(model.linear_w.at(cls, col)) > kReachabilityCutoff) {
                    info.node_reachable[l][i] = 1;
                    break;
                }
            }
        }
    }
    for (std::size_t l = n_layers; l-- > 1;) {
        const std::size_t n_half = model.layers[l].n_half();
        for (std::size_t i = 0; i < model.layers[l].n_out(); ++i) {
            if (!info.node_reachable[l][i] || info.node_constant[l][i]) continue;
            const bool conj = i < n_half;
            const BitVec& row = conj ? disc.layers[l].conj_rows[i]
                                     : disc.layers[l].disj_rows[i - n_half];
            for (std::size_t j = 0; j < row.n; ++j) {
                if (row.get(j)) info.node_reachable[l - 1][j] = 1;
            }
        }
    }
    return info;
}

RuleSet extract(const RRLModel& model, const PruneInfo* prune) {
    const DiscreteWeights disc = binarize_params(model);
    const std::size_t n_layers = model.layers.size();
    const std::size_t n_cls = model.n_classes();

    RuleSet rs;
    rs.class_names = model.schema.class_names;
    rs.bias = model.linear_b;

    // Expressions per node, built bottom-up. Dead nodes (with prune info)
    // become constants at their training-split value.
    std::vector<std::vector<Expr>> exprs(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t n_half = model.layers[l].n_half();
        exprs[l].resize(model.layers[l].n_out());
        for (std::size_t i = 0; i < model.layers[l].n_out(); ++i) {
            if (prune && prune->node_constant[l][i]) {
                exprs[l][i].kind = prune->node_value[l][i] ? Expr::Kind::True
                                                           : Expr::Kind::False;
                continue;
            }
            const bool conj = i < n_half;
            const BitVec& row = conj ? disc.layers[l].conj_rows[i]
                                     : disc.layers[l].disj_rows[i - n_half];
            Expr e;
            e.kind = conj ? Expr::Kind::And : Expr::Kind::Or;
            for (std::size_t j = 0; j < row.n; ++j) {
                if (!row.get(j)) continue;
                if (l == 0) {
                    if (prune && prune->u0_constant[j]) {
                        Expr c;
                        c.kind = prune->u0_value[j] ? Expr::Kind::True
                                                    : Expr::Kind::False;
                        e.children.push_back(c);
                    } else {
                        Expr leaf;
                        leaf.kind = Expr::Kind::Leaf;
                        leaf.leaf = j;
                        e.children.push_back(leaf);
                    }
                } else {
                    e.children.push_back(exprs[l - 1][j]);
                }
            }
            if (e.children.empty()) {
                e.kind = conj ? Expr::Kind::True : Expr::Kind::False;
            }
            exprs[l][i] = std::move(e);
        }
    }

    for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t i = 0; i < model.layers[l].n_out(); ++i) {
            const std::size_t col = concat_col(model, l + 1, i);
            if (prune) {
                if (prune->node_constant[l][i]) {
                    // Fold the constant contribution into the bias.
                    if (prune->node_value[l][i]) {
                        for (std::size_t cls = 0; cls < n_cls; ++cls) {
                            rs.bias[cls] += model.linear_w.at(cls, col);
                        }
                    }
                    continue;
                }
                if (!prune->node_reachable[l][i]) continue;
            }
            Rule rule;
            rule.layer = l + 1;
            rule.index = i;
            rule.is_conj = i < model.layers[l].n_half();
            rule.col = col;
            rule.expr = prune ? canonicalize(exprs[l][i]) : exprs[l][i];
            rule.weights.resize(n_cls);
            for (std::size_t cls = 0; cls < n_cls; ++cls) {
                rule.weights[cls] = model.linear_w.at(cls, col);
            }
            rs.rules.push_back(std::move(rule));
        }
    }

    sort_by_weight(rs.rules);
    rs.edge_count = prune ? edge_count(model, *prune) : [&] {
        std::size_t edges = 0;
        for (std::size_t l = 0; l < n_layers; ++l) {
            for (const auto& row : disc.layers[l].conj_rows) {
                for (std::size_t j = 0; j < row.n; ++j) edges += row.get(j);
            }
            for (const auto& row : disc.layers[l].disj_rows) {
                for (std::size_t j = 0; j < row.n; ++j) edges += row.get(j);
            }
        }
        return edges;
    }();
    rs.avg_rule_length = avg_rule_length(rs);
    return rs;
}

RuleSet eliminate_redundant(const RuleSet& rs) {
    RuleSet out;
    out.bias = rs.bias;
    out.class_names = rs.class_names;
    out.edge_count = rs.edge_count;

    std::map<std::string, std::size_t> by_key;
    for (const auto& rule : rs.rules) {
        Rule merged = rule;
        merged.expr = canonicalize(rule.expr);
        const std::string key = expr_key(merged.expr);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key.emplace(key, out.rules.size());
            out.rules.push_back(std::move(merged));
        } else {
            Rule& target = out.rules[it->second];
            for (std::size_t cls = 0; cls < target.weights.size(); ++cls) {
                target.weights[cls] += merged.weights[cls];
            }
            if (merged.col < target.col) {
                target.layer = merged.layer;
                target.index = merged.index;
                target.is_conj = merged.is_conj;
                target.col = merged.col;
            }
        }
    }
    sort_by_weight(out.rules);
    out.avg_rule_length = avg_rule_length(out);
    return out;
}

std::size_t edge_count(const RRLModel& model, const PruneInfo& prune) {
    const DiscreteWeights disc = binarize_params(model);
    std::size_t edges = 0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const std::size_t n_half = model.layers[l].n_half();
        for (std::size_t i = 0; i < model.layers[l].n_out(); ++i) {
            if (!prune.live_node(l, i)) continue;
            const BitVec& row = i < n_half ? disc.layers[l].conj_rows[i]
                                           : disc.layers[l].disj_rows[i - n_half];
            for (std::size_t j = 0; j < row.n; ++j) {
                if (!row.get(j)) continue;
                const bool source_live =
                    l == 0 ? prune.live_u0(j) : prune.live_node(l - 1, j);
                edges += source_live;
            }
        }
    }
    return edges;
}

double avg_rule_length(const RuleSet& rs) {
    if (rs.rules.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& rule : rs.rules) total += rule.expr.leaf_count();
    return static_cast<double>(total) / static_cast<double>(rs.rules.size());
}

std::vector<double> rule_scores(const RuleSet& rs, const BitVec& u0) {
    std::vector<double> scores = rs.bias;
    // Linear column order reproduces forward_discrete's accumulation.
    std::vector<const Rule*> ordered;
    ordered.reserve(rs.rules.size());
    for (const auto& r : rs.rules) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const Rule* a, const Rule* b) { return a->col < b->col; });
    for (const Rule* r : ordered) {
        if (!r->expr.evaluate(u0)) continue;
        for (std::size_t cls = 0; cls < scores.size(); ++cls) {
            scores[cls] += r->weights[cls];
        }
    }
    return scores;
}

std::string rule_text(const RRLModel& model, const Expr& expr) {
    return render(model, expr, false);
}

std::string explain(const RRLModel& model, const RuleSet& rs, std::size_t top_n) {
    double w_max = 0.0;
    for (const auto& r : rs.rules) w_max = std::max(w_max, r.max_abs_weight());
    const double norm = w_max > 0 ? 1.0 / w_max : 0.0;

    char buf[128];
    std::string out;
    out += "RRL rule report\n";
    std::snprintf(buf, sizeof(buf),
                  "rules: %zu  edges: %zu  avg rule length: %.2f\n",
                  rs.rules.size(), rs.edge_count, rs.avg_rule_length);
    out += buf;
    for (std::size_t cls = 0; cls < rs.class_names.size(); ++cls) {
        std::snprintf(buf, sizeof(buf), "\nclass %s (bias %+.6g)\n",
                      rs.class_names[cls].c_str(), rs.bias[cls]);
        out += buf;
        std::vector<const Rule*> by_cls;
        for (const auto& r : rs.rules) by_cls.push_back(&r);
        std::stable_sort(by_cls.begin(), by_cls.end(),
                         [cls](const Rule* a, const Rule* b) {
                             return std::fabs(a->weights[cls]) >
                                    std::fabs(b->weights[cls]);
                         });
        const std::size_t n = std::min(top_n, by_cls.size());
        for (std::size_t i = 0; i < n; ++i) {
            const Rule* r = by_cls[i];
            std::snprintf(buf, sizeof(buf), "  %+.6f (norm %.3f) [%s L%zu#%zu] ",
                          r->weights[cls], std::fabs(r->weights[cls]) * norm,
                          r->is_conj ? "conj" : "disj", r->layer, r->index);
            out += buf;
            out += rule_text(model, r->expr);
            out += '\n';
        }
    }
    return out;
}

std::string ruleset_to_json(const RRLModel& model, const RuleSet& rs) {
    double w_max = 0.0;
    for (const auto& r : rs.rules) w_max = std::max(w_max, r.max_abs_weight());
    const double norm = w_max > 0 ? 1.0 / w_max : 0.0;

    nlohmann::json j;
    j["class_names"] = rs.class_names;
    j["bias"] = rs.bias;
    j["edge_count"] = rs.edge_count;
    j["avg_rule_length"] = rs.avg_rule_length;
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : rs.rules) {
        std::vector<double> norm_w(r.weights.size());
        for (std::size_t cls = 0; cls < r.weights.size(); ++cls) {
            norm_w[cls] = std::fabs(r.weights[cls]) * norm;
        }
        rules.push_back({{"layer", r.layer},
                         {"index", r.index},
                         {"kind", r.is_conj ? "conj" : "disj"},
                         {"weights", r.weights},
                         {"normalized_abs_weights", norm_w},
                         {"text", rule_text(model, r.expr)},
                         {"expr", expr_to_json(model, r.expr)}});
    }
    j["rules"] = std::move(rules);
    return j.dump(1);
}

}  // namespace rrl

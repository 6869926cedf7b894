#include "rrl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rrl/rng.hpp"

namespace rrl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

double parse_double(const std::string& cell, std::size_t row,
                    const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw DataError("non-numeric value '" + cell + "' in continuous column '" +
                        column + "' at data row " + std::to_string(row));
    }
    return v;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw DataError("empty data file: " + path);
    RawTable t;
    t.header = split_csv_line(lines[0]);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cells = split_csv_line(lines[i]);
        if (cells.size() != t.header.size()) {
            throw DataError("row " + std::to_string(i) + " of " + path + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

// Column index of every schema feature (and the label) in the CSV header;
// rejects columns unknown to either side.
struct ColumnMap {
    std::vector<std::size_t> feature_col;
    std::size_t label_col = 0;
};

ColumnMap map_columns(const DatasetSchema& schema, const RawTable& t,
                      const std::string& path) {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (!by_name.emplace(t.header[i], i).second) {
            throw DataError("duplicate column '" + t.header[i] + "' in " + path);
        }
    }
    std::set<std::string> described;
    ColumnMap cm;
    for (const auto& f : schema.features) {
        auto it = by_name.find(f.name);
        if (it == by_name.end()) {
            throw DataError("schema column '" + f.name + "' missing from " + path);
        }
        cm.feature_col.push_back(it->second);
        described.insert(f.name);
    }
    auto it = by_name.find(schema.label_name);
    if (it == by_name.end()) {
        throw DataError("label column '" + schema.label_name + "' missing from " + path);
    }
    cm.label_col = it->second;
    described.insert(schema.label_name);
    for (const auto& name : t.header) {
        if (!described.count(name)) {
            throw DataError("unknown column '" + name + "' in " + path +
                            " (not described by the schema)");
        }
    }
    return cm;
}

EncodedDataset encode_table(const DatasetSchema& schema, const RawTable& t,
                            const ColumnMap& cm) {
    const std::size_t n = t.rows.size();
    const std::size_t m = schema.n_continuous();
    const std::size_t b_width = schema.binary_width();

    EncodedDataset ds;
    ds.schema = schema;
    ds.c = Matrix(n, m);
    ds.b.assign(n * b_width, 0);
    ds.labels.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c_pos = 0, b_pos = 0;
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            const auto& feat = schema.features[f];
            const std::string& cell = t.rows[i][cm.feature_col[f]];
            if (feat.kind == FeatureKind::Continuous) {
                ds.c.at(i, c_pos++) = parse_double(cell, i + 1, feat.name);
            } else {
                auto it = std::lower_bound(feat.categories.begin(),
                                           feat.categories.end(), cell);
                if (it == feat.categories.end() || *it != cell) {
                    throw DataError("unseen value '" + cell + "' in column '" +
                                    feat.name + "' at data row " +
                                    std::to_string(i + 1));
                }
                ds.b[i * b_width + b_pos +
                     static_cast<std::size_t>(it - feat.categories.begin())] = 1;
                b_pos += feat.categories.size();
            }
        }
        const std::string& label = t.rows[i][cm.label_col];
        auto it = std::lower_bound(schema.class_names.begin(),
                                   schema.class_names.end(), label);
        if (it == schema.class_names.end() || *it != label) {
            throw DataError("unseen label value '" + label + "' at data row " +
                            std::to_string(i + 1));
        }
        ds.labels[i] = static_cast<int>(it - schema.class_names.begin());
    }

    ds.c_min.assign(m, 0.0);
    ds.c_max.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double lo = n ? ds.c.at(0, j) : 0.0, hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, ds.c.at(i, j));
            hi = std::max(hi, ds.c.at(i, j));
        }
        ds.c_min[j] = lo;
        ds.c_max[j] = hi;
    }
    return ds;
}

}  // namespace

std::size_t DatasetSchema::n_continuous() const {
    std::size_t m = 0;
    for (const auto& f : features) m += f.kind == FeatureKind::Continuous;
    return m;
}

std::size_t DatasetSchema::binary_width() const {
    std::size_t b = 0;
    for (const auto& f : features) {
        if (f.kind == FeatureKind::Discrete) b += f.categories.size();
    }
    return b;
}

std::uint64_t DatasetSchema::fingerprint() const {
    std::string canon;
    for (const auto& f : features) {
        canon += f.name;
        canon += f.kind == FeatureKind::Continuous ? ":c" : ":d";
        for (const auto& cat : f.categories) {
            canon += '|';
            canon += cat;
        }
        canon += '\n';
    }
    canon += label_name;
    for (const auto& cls : class_names) {
        canon += '|';
        canon += cls;
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

const std::string& EncodedDataset::decode_category(std::size_t i,
                                                   std::size_t d) const {
    std::size_t b_pos = 0, seen = 0;
    for (const auto& f : schema.features) {
        if (f.kind != FeatureKind::Discrete) continue;
        if (seen == d) {
            for (std::size_t v = 0; v < f.categories.size(); ++v) {
                if (b[i * binary_width() + b_pos + v]) return f.categories[v];
            }
            throw DataError("one-hot block has no set bit");
        }
        b_pos += f.categories.size();
        ++seen;
    }
    throw DataError("discrete feature index out of range");
}

EncodedDataset EncodedDataset::subset(std::span<const std::size_t> indices) const {
    const std::size_t m = schema.n_continuous();
    const std::size_t bw = binary_width();
    EncodedDataset out;
    out.schema = schema;
    out.c = Matrix(indices.size(), m);
    out.b.assign(indices.size() * bw, 0);
    out.labels.resize(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::size_t i = indices[r];
        std::copy(c.row(i), c.row(i) + m, out.c.row(r));
        std::copy(b.begin() + i * bw, b.begin() + (i + 1) * bw,
                  out.b.begin() + r * bw);
        out.labels[r] = labels[i];
    }
    out.c_min.assign(m, 0.0);
    out.c_max.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double lo = indices.empty() ? 0.0 : out.c.at(0, j), hi = lo;
        for (std::size_t r = 1; r < indices.size(); ++r) {
            lo = std::min(lo, out.c.at(r, j));
            hi = std::max(hi, out.c.at(r, j));
        }
        out.c_min[j] = lo;
        out.c_max[j] = hi;
    }
    return out;
}

DatasetSchema load_schema(const std::string& schema_path) {
    DatasetSchema schema;
    bool label_seen = false;
    const auto lines = read_lines(schema_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() != 2 || cells[0].empty()) {
            throw DataError("malformed schema line " + std::to_string(i + 1) +
                            " in " + schema_path + " (expected name,kind)");
        }
        const std::string& kind = cells[1];
        if (kind == "label") {
            if (label_seen) {
                throw DataError("multiple label columns in " + schema_path);
            }
            schema.label_name = cells[0];
            label_seen = true;
        } else if (kind == "continuous" || kind == "discrete") {
            schema.features.push_back(
                {cells[0],
                 kind == "continuous" ? FeatureKind::Continuous
                                      : FeatureKind::Discrete,
                 {}});
        } else {
            throw DataError("unknown kind '" + kind + "' in " + schema_path +
                            " line " + std::to_string(i + 1));
        }
    }
    if (!label_seen) throw DataError("no label column in " + schema_path);
    return schema;
}

EncodedDataset load_dataset(const std::string& data_path,
                            const std::string& schema_path) {
    DatasetSchema schema = load_schema(schema_path);
    const RawTable t = read_csv(data_path);
    const ColumnMap cm = map_columns(schema, t, data_path);

    // Fix category and class vocabularies from this data.
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        if (schema.features[f].kind != FeatureKind::Discrete) continue;
        std::set<std::string> values;
        for (const auto& row : t.rows) values.insert(row[cm.feature_col[f]]);
        schema.features[f].categories.assign(values.begin(), values.end());
    }
    std::set<std::string> classes;
    for (const auto& row : t.rows) classes.insert(row[cm.label_col]);
    schema.class_names.assign(classes.begin(), classes.end());

    return encode_table(schema, t, cm);
}

EncodedDataset encode_dataset(const DatasetSchema& schema,
                              const std::string& data_path) {
    const RawTable t = read_csv(data_path);
    return encode_table(schema, t, map_columns(schema, t, data_path));
}

FoldPlan stratified_kfold(const EncodedDataset& ds, std::size_t k,
                          std::uint64_t seed) {
    if (k < 2) throw DataError("fold count must be >= 2");
    const std::size_t n = ds.size();
    const std::size_t n_classes = ds.n_classes();

    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < n; ++i) by_class[ds.labels[i]].push_back(i);
    for (std::size_t cls = 0; cls < n_classes; ++cls) {
        if (by_class[cls].size() < k) {
            throw DataError("class '" + ds.schema.class_names[cls] + "' has " +
                            std::to_string(by_class[cls].size()) +
                            " instances, fewer than " + std::to_string(k) +
                            " folds");
        }
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.test.assign(k, {});
    plan.train.assign(k, {});

    Rng rng(mix_seed(seed, 0xf01d5));
    // Deal shuffled per-class indices round-robin with a fold cursor that
    // carries across classes, so remainders land on different folds and
    // total test sizes stay as even as possible.
    std::size_t cursor = 0;
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t idx : members) {
            plan.test[cursor].push_back(idx);
            cursor = (cursor + 1) % k;
        }
    }
    std::vector<std::size_t> fold_of(n);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(plan.test[f].begin(), plan.test[f].end());
        for (std::size_t idx : plan.test[f]) fold_of[idx] = f;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < k; ++f) {
            if (fold_of[i] != f) plan.train[f].push_back(i);
        }
    }
    return plan;
}

std::string FoldPlan::to_json() const {
    std::ostringstream os;
    auto list = [&os](const std::vector<std::size_t>& v) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ',';
            os << v[i];
        }
        os << ']';
    };
    os << "{\"k\":" << k << ",\"seed\":" << seed << ",\"folds\":[";
    for (std::size_t f = 0; f < k; ++f) {
        if (f) os << ',';
        os << "{\"train\":";
        list(train[f]);
        os << ",\"test\":";
        list(test[f]);
        os << '}';
    }
    os << "]}";
    return os.str();
}

double macro_f1(std::span<const int> pred, std::span<const int> truth,
                std::size_t n_classes) {
    std::vector<double> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) {
            tp[pred[i]] += 1;
        } else {
            fp[pred[i]] += 1;
            fn[truth[i]] += 1;
        }
    }
    double sum = 0.0;
    for (std::size_t cls = 0; cls < n_classes; ++cls) {
        const double precision =
            tp[cls] + fp[cls] > 0 ? tp[cls] / (tp[cls] + fp[cls]) : 0.0;
        const double recall =
            tp[cls] + fn[cls] > 0 ? tp[cls] / (tp[cls] + fn[cls]) : 0.0;
        if (precision + recall > 0) {
            sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    return sum / static_cast<double>(n_classes);
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    if (pred.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace rrl

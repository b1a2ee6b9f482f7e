#include "embeval/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "embeval/csv.hpp"
#include "embeval/error.hpp"

namespace embeval {

namespace {

void check_unique_ids(const std::vector<std::string>& ids, const std::string& path,
                      const std::vector<long long>& row_lines) {
    std::unordered_set<std::string> seen;
    seen.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!seen.insert(ids[i]).second)
            throw InputError(path + ":" + std::to_string(row_lines[i]) + ": duplicate id '" +
                             ids[i] + "'");
    }
}

std::vector<std::string> distinct_sorted(const std::vector<std::string>& values) {
    std::set<std::string> s(values.begin(), values.end());
    return {s.begin(), s.end()};
}

std::string quantile_label(const std::string& column, double lo, double hi, bool last) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s∈[%.6g,%.6g%c", column.c_str(), lo, hi,
                  last ? ']' : ')');
    return buf;
}

}  // namespace

const FeatureColumn& FeatureTable::column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return c;
    throw InputError("unknown feature column '" + name + "'");
}

bool FeatureTable::has_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return true;
    return false;
}

EmbeddingSet load_embeddings(const std::string& path) {
    const csv::Table table = csv::read_csv(path);
    if (table.header.empty() || table.header[0] != "id")
        throw InputError(path + ":1: expected header starting with 'id'");
    const auto d = static_cast<long long>(table.header.size()) - 1;
    if (d < 1) throw InputError(path + ":1: no embedding columns");
    if (table.rows.empty()) throw InputError(path + ": no data rows");

    EmbeddingSet emb;
    emb.name = path;
    emb.ids.reserve(table.rows.size());
    emb.matrix.resize(static_cast<long long>(table.rows.size()), d);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        emb.ids.push_back(row[0]);
        for (long long j = 0; j < d; ++j) {
            double v = 0.0;
            if (!csv::parse_double(row[static_cast<std::size_t>(j) + 1], v))
                throw InputError(path + ":" + std::to_string(table.row_lines[r]) +
                                 ": non-numeric cell '" + row[static_cast<std::size_t>(j) + 1] +
                                 "' in column " + table.header[static_cast<std::size_t>(j) + 1]);
            if (!std::isfinite(v))
                throw InputError(path + ":" + std::to_string(table.row_lines[r]) +
                                 ": non-finite value in column " +
                                 table.header[static_cast<std::size_t>(j) + 1]);
            emb.matrix(static_cast<long long>(r), j) = v;
        }
    }
    check_unique_ids(emb.ids, path, table.row_lines);
    return emb;
}

void write_embeddings_csv(const EmbeddingSet& emb, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot open for writing");
    std::vector<std::string> row;
    row.push_back("id");
    for (long long j = 0; j < emb.dim(); ++j) row.push_back("e" + std::to_string(j));
    csv::write_row(out, row);
    for (long long i = 0; i < emb.n(); ++i) {
        row.clear();
        row.push_back(emb.ids[static_cast<std::size_t>(i)]);
        for (long long j = 0; j < emb.dim(); ++j)
            row.push_back(csv::format_double(emb.matrix(i, j)));
        csv::write_row(out, row);
    }
    if (!out) throw InputError(path + ": write failed");
}

FeatureTable load_features(const std::string& path, MissingPolicy missing) {
    const csv::Table table = csv::read_csv(path);
    if (table.header.empty() || table.header[0] != "id")
        throw InputError(path + ":1: expected header starting with 'id'");
    if (table.header.size() < 2) throw InputError(path + ":1: no feature columns");
    if (table.rows.empty()) throw InputError(path + ": zero data rows");

    FeatureTable feats;
    feats.columns.resize(table.header.size() - 1);
    std::unordered_set<std::string> names;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        if (table.header[c].empty())
            throw InputError(path + ":1: empty column name at position " + std::to_string(c + 1));
        if (!names.insert(table.header[c]).second)
            throw InputError(path + ":1: duplicate column name '" + table.header[c] + "'");
        feats.columns[c - 1].name = table.header[c];
    }

    feats.ids.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        feats.ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            std::string value = row[c];
            if (value.empty()) {
                if (missing == MissingPolicy::Error)
                    throw InputError(path + ":" + std::to_string(table.row_lines[r]) +
                                     ": missing value in column '" + table.header[c] + "'");
                value = kMissingCategory;
            }
            feats.columns[c - 1].values.push_back(std::move(value));
        }
    }
    check_unique_ids(feats.ids, path, table.row_lines);
    for (auto& col : feats.columns) col.categories = distinct_sorted(col.values);
    return feats;
}

FeatureTable discretize_numeric(const FeatureTable& table, const std::string& column,
                                int nbins) {
    if (nbins < 1) throw InputError("discretize: nbins must be >= 1");
    const FeatureColumn& src = table.column(column);

    std::vector<double> values(src.values.size());
    for (std::size_t i = 0; i < src.values.size(); ++i) {
        if (!csv::parse_double(src.values[i], values[i]))
            throw InputError("discretize: non-numeric cell '" + src.values[i] + "' in column '" +
                             column + "' (entity " + table.ids[i] + ")");
    }

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();

    // Interior boundaries at p = j/nbins via linear interpolation on the
    // sorted sample; equal boundaries collapse so degenerate quantiles
    // cannot produce empty label ranges.
    std::vector<double> boundaries;
    for (int j = 1; j < nbins; ++j) {
        const double h = static_cast<double>(n - 1) * static_cast<double>(j) /
                         static_cast<double>(nbins);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, n - 1);
        const double frac = h - std::floor(h);
        const double q = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
        if (boundaries.empty() || q > boundaries.back()) boundaries.push_back(q);
    }
    // Boundaries at or below the minimum would leave an empty first bin.
    while (!boundaries.empty() && boundaries.front() <= sorted.front())
        boundaries.erase(boundaries.begin());

    std::vector<double> edges;
    edges.push_back(sorted.front());
    edges.insert(edges.end(), boundaries.begin(), boundaries.end());
    edges.push_back(sorted.back());

    const std::size_t nb = boundaries.size() + 1;
    std::vector<std::string> labels(nb);
    for (std::size_t b = 0; b < nb; ++b)
        labels[b] = quantile_label(column, edges[b], edges[b + 1], b + 1 == nb);

    FeatureTable out = table;
    for (auto& col : out.columns) {
        if (col.name != column) continue;
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::size_t bin = 0;
            for (const double b : boundaries) {
                if (values[i] >= b)
                    ++bin;
                else
                    break;
            }
            col.values[i] = labels[bin];
        }
        col.categories = distinct_sorted(col.values);
    }
    return out;
}

BinaryFeatureTable binarize(const FeatureTable& table) {
    BinaryFeatureTable out;
    out.ids = table.ids;
    const auto n = table.ids.size();
    for (const auto& col : table.columns) {
        const bool passthrough =
            col.categories.size() == 2 && col.categories[0] == "0" && col.categories[1] == "1";
        if (passthrough) {
            BinaryColumn bc;
            bc.name = col.name + "==1";
            bc.source_column = col.name;
            bc.category = "1";
            bc.values.resize(n);
            for (std::size_t i = 0; i < n; ++i) bc.values[i] = col.values[i] == "1" ? 1 : 0;
            out.columns.push_back(std::move(bc));
            continue;
        }
        for (const auto& cat : col.categories) {
            BinaryColumn bc;
            bc.name = col.name + "==" + cat;
            bc.source_column = col.name;
            bc.category = cat;
            bc.values.resize(n);
            for (std::size_t i = 0; i < n; ++i) bc.values[i] = col.values[i] == cat ? 1 : 0;
            out.columns.push_back(std::move(bc));
        }
    }
    return out;
}

Clustering cluster_by_feature(const FeatureTable& table, const std::string& column) {
    const FeatureColumn& col = table.column(column);
    std::map<std::string, int> index;
    for (const auto& cat : col.categories) {
        const int next = static_cast<int>(index.size());
        index.emplace(cat, next);
    }
    Clustering clustering;
    clustering.m = static_cast<int>(index.size());
    clustering.labels = col.categories;
    clustering.criterion = "feature:" + column;
    clustering.assignment.resize(col.values.size());
    for (std::size_t i = 0; i < col.values.size(); ++i)
        clustering.assignment[i] = index.at(col.values[i]);
    validate_clustering(clustering);
    return clustering;
}

std::pair<EmbeddingSet, FeatureTable> align(const EmbeddingSet& emb, const FeatureTable& feats) {
    std::unordered_map<std::string, std::size_t> feat_row;
    feat_row.reserve(feats.ids.size());
    for (std::size_t i = 0; i < feats.ids.size(); ++i) feat_row.emplace(feats.ids[i], i);

    std::vector<long long> emb_rows;
    std::vector<std::size_t> feat_rows;
    for (std::size_t i = 0; i < emb.ids.size(); ++i) {
        const auto it = feat_row.find(emb.ids[i]);
        if (it == feat_row.end()) continue;
        emb_rows.push_back(static_cast<long long>(i));
        feat_rows.push_back(it->second);
    }
    if (emb_rows.empty()) throw InputError("align: no ids in common");

    EmbeddingSet emb_out;
    emb_out.name = emb.name;
    emb_out.matrix.resize(static_cast<long long>(emb_rows.size()), emb.dim());
    emb_out.ids.reserve(emb_rows.size());
    for (std::size_t i = 0; i < emb_rows.size(); ++i) {
        emb_out.ids.push_back(emb.ids[static_cast<std::size_t>(emb_rows[i])]);
        emb_out.matrix.row(static_cast<long long>(i)) = emb.matrix.row(emb_rows[i]);
    }

    FeatureTable feats_out;
    feats_out.ids = emb_out.ids;
    feats_out.columns.reserve(feats.columns.size());
    for (const auto& col : feats.columns) {
        FeatureColumn c;
        c.name = col.name;
        c.values.reserve(feat_rows.size());
        for (const auto r : feat_rows) c.values.push_back(col.values[r]);
        c.categories = distinct_sorted(c.values);
        feats_out.columns.push_back(std::move(c));
    }
    return {std::move(emb_out), std::move(feats_out)};
}

void write_clustering_csv(const std::vector<std::string>& ids, const Clustering& clustering,
                          const std::string& path) {
    if (ids.size() != clustering.assignment.size())
        throw InternalError("write_clustering_csv: id/assignment size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot open for writing");
    csv::write_row(out, {"id", "cluster"});
    for (std::size_t i = 0; i < ids.size(); ++i)
        csv::write_row(out, {ids[i], std::to_string(clustering.assignment[i])});
    if (!out) throw InputError(path + ": write failed");
}

std::pair<EmbeddingSet, Clustering> load_clustering_for(const EmbeddingSet& emb,
                                                        const std::string& path) {
    const csv::Table table = csv::read_csv(path);
    if (table.header.size() != 2 || table.header[0] != "id" || table.header[1] != "cluster")
        throw InputError(path + ":1: expected header 'id,cluster'");
    if (table.rows.empty()) throw InputError(path + ": zero data rows");

    std::unordered_map<std::string, long long> value_of;
    value_of.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        long long v = 0;
        try {
            std::size_t pos = 0;
            v = std::stoll(row[1], &pos);
            if (pos != row[1].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(table.row_lines[r]) +
                             ": non-integer cluster '" + row[1] + "'");
        }
        if (!value_of.emplace(row[0], v).second)
            throw InputError(path + ":" + std::to_string(table.row_lines[r]) +
                             ": duplicate id '" + row[0] + "'");
    }

    std::vector<long long> emb_rows;
    std::vector<long long> raw;
    for (std::size_t i = 0; i < emb.ids.size(); ++i) {
        const auto it = value_of.find(emb.ids[i]);
        if (it == value_of.end()) continue;
        emb_rows.push_back(static_cast<long long>(i));
        raw.push_back(it->second);
    }
    if (emb_rows.empty()) throw InputError("clusters file shares no ids with the embeddings");

    std::map<long long, int> index;
    for (const auto v : raw) {
        const int next = static_cast<int>(index.size());
        index.emplace(v, next);
    }
    // map insertion left gaps in the index sequence; rebuild in ascending order
    {
        int next = 0;
        for (auto& [value, idx] : index) idx = next++;
    }

    EmbeddingSet emb_out;
    emb_out.name = emb.name;
    emb_out.matrix.resize(static_cast<long long>(emb_rows.size()), emb.dim());
    for (std::size_t i = 0; i < emb_rows.size(); ++i) {
        emb_out.ids.push_back(emb.ids[static_cast<std::size_t>(emb_rows[i])]);
        emb_out.matrix.row(static_cast<long long>(i)) = emb.matrix.row(emb_rows[i]);
    }

    Clustering clustering;
    clustering.m = static_cast<int>(index.size());
    clustering.criterion = "clusters-file:" + path;
    clustering.labels.reserve(index.size());
    for (const auto& [value, idx] : index) clustering.labels.push_back(std::to_string(value));
    clustering.assignment.reserve(raw.size());
    for (const auto v : raw) clustering.assignment.push_back(index.at(v));
    validate_clustering(clustering);
    return {std::move(emb_out), std::move(clustering)};
}

void validate_clustering(const Clustering& clustering) {
    if (clustering.m < 1) throw InputError("clustering: needs at least one cluster");
    std::vector<long long> sizes(static_cast<std::size_t>(clustering.m), 0);
    for (const int a : clustering.assignment) {
        if (a < 0 || a >= clustering.m)
            throw InputError("clustering: assignment index out of range");
        ++sizes[static_cast<std::size_t>(a)];
    }
    for (int k = 0; k < clustering.m; ++k)
        if (sizes[static_cast<std::size_t>(k)] == 0)
            throw InputError("clustering: cluster " + std::to_string(k) + " is empty");
}

}  // namespace embeval

#include "wombat/analyse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "text_util.hpp"
#include "wombat/error.hpp"

namespace wombat {

namespace {

void check_lengths(std::span<const float> a, std::span<const float> b)
{
    if (a.size() != b.size()) {
        throw AnalysisError("vector length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
}

std::string sentence_text(const UnitResult& unit)
{
    return unit.raw.empty() ? detail::join(unit.tokens, " ") : unit.raw;
}

std::string format_fixed6(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6f", value);
    return buffer;
}

std::string csv_field(std::string_view field)
{
    bool quote = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                 (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!quote) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string xml_escape(std::string_view text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void write_svg(const SimilarityMatrix& m, std::ostream& out)
{
    constexpr int kCell = 40;
    constexpr double kCharWidth = 7.5;
    std::size_t longest_row = 0;
    std::size_t longest_col = 0;
    for (const auto& l : m.row_labels) longest_row = std::max(longest_row, l.size());
    for (const auto& l : m.col_labels) longest_col = std::max(longest_col, l.size());
    const int left = static_cast<int>(longest_row * kCharWidth) + 12;
    const int top = static_cast<int>(longest_col * kCharWidth) + 12;
    const int width = left + static_cast<int>(m.cols()) * kCell + 4;
    const int height = top + static_cast<int>(m.rows()) * kCell + 4;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : m.values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"monospace\" font-size=\"12\">\n";
    out << "<!-- grayscale: black = " << format_fixed6(hi) << ", white = " << format_fixed6(lo) << " -->\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            double v = m.at(r, c);
            std::string fill = "none";
            if (std::isfinite(v)) {
                double t = hi > lo ? (hi - v) / (hi - lo) : 0.0;
                int g = static_cast<int>(std::lround(255.0 * t));
                fill = "rgb(" + std::to_string(g) + "," + std::to_string(g) + "," + std::to_string(g) + ")";
            }
            out << "<rect class=\"cell\" x=\"" << left + static_cast<int>(c) * kCell << "\" y=\""
                << top + static_cast<int>(r) * kCell << "\" width=\"" << kCell << "\" height=\"" << kCell
                << "\" fill=\"" << fill << "\" stroke=\"#888\"><title>" << xml_escape(m.row_labels[r]) << " / "
                << xml_escape(m.col_labels[c]) << ": " << format_fixed6(v) << "</title></rect>\n";
        }
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << "<text x=\"" << left - 6 << "\" y=\"" << top + static_cast<int>(r) * kCell + kCell / 2 + 4
            << "\" text-anchor=\"end\">" << xml_escape(m.row_labels[r]) << "</text>\n";
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
        int x = left + static_cast<int>(c) * kCell + kCell / 2 + 4;
        out << "<text x=\"" << x << "\" y=\"" << top - 6 << "\" transform=\"rotate(-90 " << x << " " << top - 6
            << ")\" text-anchor=\"start\">" << xml_escape(m.col_labels[c]) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace

SentenceVector average_vector(std::span<const std::string> words, std::span<const Vector> vectors,
                              const StopwordList& stopwords)
{
    if (words.size() != vectors.size()) {
        throw AnalysisError("average_vector needs one word per vector");
    }
    SentenceVector out;
    std::vector<double> sum;
    std::size_t n = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!vectors.empty() && vectors[i].size() != vectors.front().size()) {
            throw AnalysisError("average_vector: mixed vector lengths");
        }
        if (stopwords.contains(words[i])) {
            out.excluded.push_back(words[i]);
            continue;
        }
        if (sum.empty()) sum.assign(vectors[i].size(), 0.0);
        for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += vectors[i][d];
        out.used_tokens.push_back(words[i]);
        ++n;
    }
    out.defined = n > 0;
    if (out.defined) {
        out.vector.resize(sum.size());
        for (std::size_t d = 0; d < sum.size(); ++d) {
            out.vector[d] = static_cast<float>(sum[d] / static_cast<double>(n));
        }
    }
    return out;
}

SentenceVector average_vector(const UnitResult& unit, const StopwordList& stopwords)
{
    if (unit.words.empty() && !unit.vectors.empty()) {
        throw AnalysisError("average_vector needs word/vector pairs (retrieve with as_tuple)");
    }
    auto out = average_vector(unit.words, unit.vectors, stopwords);
    out.excluded.insert(out.excluded.end(), unit.missing.begin(), unit.missing.end());
    return out;
}

std::optional<double> cosine_distance(std::span<const float> a, std::span<const float> b)
{
    auto sim = cosine_similarity(a, b);
    if (!sim) return std::nullopt;
    return std::clamp(1.0 - *sim, 0.0, 2.0);
}

std::optional<double> cosine_similarity(std::span<const float> a, std::span<const float> b)
{
    check_lengths(a, b);
    double dot = 0;
    double na = 0;
    double nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) {
        return std::nullopt;
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::optional<double> euclidean_distance(std::span<const float> a, std::span<const float> b)
{
    check_lengths(a, b);
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

Metric metric_by_name(std::string_view name)
{
    if (name == "cosine") return cosine_distance;
    if (name == "cosine_similarity") return cosine_similarity;
    if (name == "euclidean") return euclidean_distance;
    throw AnalysisError("unknown metric '" + std::string(name) + "'");
}

DistanceRanking pairwise_distances(const RetrievalResult& first, const RetrievalResult& second, const Metric& metric,
                                   bool reverse, const StopwordList& stopwords)
{
    if (first.per_wec.size() != second.per_wec.size()) {
        throw AnalysisError("pairwise_distances: results cover different WEC sets");
    }
    std::map<std::string_view, const WecResult*> by_id;
    for (const auto& w : second.per_wec) by_id.emplace(w.identifier, &w);

    DistanceRanking out;
    for (const auto& a : first.per_wec) {
        auto it = by_id.find(a.identifier);
        if (it == by_id.end()) {
            throw AnalysisError("pairwise_distances: WEC '" + a.identifier + "' missing from second result");
        }
        const auto& b = *it->second;
        if (a.units.size() != b.units.size()) {
            throw AnalysisError("pairwise_distances: unit count mismatch for '" + a.identifier + "' (" +
                                std::to_string(a.units.size()) + " vs " + std::to_string(b.units.size()) + ")");
        }
        WecRanking ranking{a.identifier, {}, {}};
        for (std::size_t i = 0; i < a.units.size(); ++i) {
            auto va = average_vector(a.units[i], stopwords);
            auto vb = average_vector(b.units[i], stopwords);
            std::optional<double> d;
            if (va.defined && vb.defined) {
                d = metric(va.vector, vb.vector);
            }
            if (!d || std::isnan(*d)) {
                ranking.undefined_pairs.push_back(i);
                continue;
            }
            ranking.ranked.push_back({*d, sentence_text(a.units[i]), sentence_text(b.units[i]), i});
        }
        std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(), [reverse](const RankedPair& x, const RankedPair& y) {
            if (x.distance != y.distance) {
                return reverse ? x.distance > y.distance : x.distance < y.distance;
            }
            if (x.sentence1 != y.sentence1) return x.sentence1 < y.sentence1;
            return x.sentence2 < y.sentence2;
        });
        out.per_wec.push_back(std::move(ranking));
    }
    return out;
}

void write_ranking(const WecRanking& ranking, std::ostream& out)
{
    for (const auto& r : ranking.ranked) {
        out << format_fixed6(r.distance) << '\t' << r.sentence1 << '\t' << r.sentence2 << '\n';
    }
}

SimilarityMatrix similarity_matrix(const UnitResult& u1, const UnitResult& u2, const Metric& metric)
{
    if (u1.vectors.empty() || u2.vectors.empty()) {
        throw AnalysisError("similarity_matrix: no token with a vector on one side");
    }
    if (u1.words.size() != u1.vectors.size() || u2.words.size() != u2.vectors.size()) {
        throw AnalysisError("similarity_matrix needs word/vector pairs (retrieve with as_tuple)");
    }
    if (u1.vectors.front().size() != u2.vectors.front().size()) {
        throw AnalysisError("similarity_matrix: dims mismatch");
    }
    SimilarityMatrix m{u1.words, u2.words, {}};
    m.values.reserve(m.rows() * m.cols());
    for (const auto& a : u1.vectors) {
        for (const auto& b : u2.vectors) {
            auto v = metric(a, b);
            m.values.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
        }
    }
    return m;
}

void export_heatmap(const SimilarityMatrix& matrix, const std::filesystem::path& path, HeatmapFormat format)
{
    if (matrix.values.size() != matrix.rows() * matrix.cols()) {
        throw AnalysisError("export_heatmap: label counts do not match the matrix shape");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw AnalysisError("cannot write '" + path.string() + "'");
    }
    if (format == HeatmapFormat::Svg) {
        write_svg(matrix, out);
    } else {
        for (const auto& label : matrix.col_labels) {
            out << ',' << csv_field(label);
        }
        out << '\n';
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            out << csv_field(matrix.row_labels[r]);
            for (std::size_t c = 0; c < matrix.cols(); ++c) {
                out << ',' << format_fixed6(matrix.at(r, c));
            }
            out << '\n';
        }
    }
    out.flush();
    if (!out) {
        throw AnalysisError("cannot write '" + path.string() + "'");
    }
}

SimilarityMatrix read_heatmap_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw AnalysisError("cannot read '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto rows = parse_csv(buffer.str());
    if (rows.empty()) {
        throw AnalysisError("empty heatmap CSV");
    }
    SimilarityMatrix m;
    m.col_labels.assign(rows[0].begin() + 1, rows[0].end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols() + 1) {
            throw AnalysisError("heatmap CSV row " + std::to_string(r + 1) + " has the wrong number of cells");
        }
        m.row_labels.push_back(rows[r][0]);
        for (std::size_t c = 1; c < rows[r].size(); ++c) {
            m.values.push_back(rows[r][c] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(rows[r][c]));
        }
    }
    return m;
}

} // namespace wombat

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wombat/retrieve.hpp"
#include "wombat/stopwords.hpp"

namespace wombat {

struct SentenceVector {
    Vector vector;
    Tokens used_tokens;
    /// Stopwords and out-of-vocabulary tokens left out of the mean.
    Tokens excluded;
    bool defined = false;
};

/// Mean of the vectors whose word is not a stopword; `defined` is false when
/// nothing remains. Throws AnalysisError on mixed vector lengths.
SentenceVector average_vector(std::span<const std::string> words, std::span<const Vector> vectors,
                              const StopwordList& stopwords);

/// Same, over a retrieval unit; its missing tokens are reported as excluded.
SentenceVector average_vector(const UnitResult& unit, const StopwordList& stopwords);

/// nullopt when the value is undefined for the inputs (e.g. a zero vector).
using Metric = std::function<std::optional<double>(std::span<const float>, std::span<const float>)>;

/// 1 - cos(a, b), accumulated in double and clamped to [0, 2].
std::optional<double> cosine_distance(std::span<const float> a, std::span<const float> b);
std::optional<double> cosine_similarity(std::span<const float> a, std::span<const float> b);
std::optional<double> euclidean_distance(std::span<const float> a, std::span<const float> b);

/// `cosine`, `cosine_similarity` or `euclidean`.
Metric metric_by_name(std::string_view name);

struct RankedPair {
    double distance = 0;
    std::string sentence1;
    std::string sentence2;
    /// Position of the pair in the input.
    std::size_t index = 0;
};

struct WecRanking {
    std::string identifier;
    std::vector<RankedPair> ranked;
    std::vector<std::size_t> undefined_pairs;
};

struct DistanceRanking {
    std::vector<WecRanking> per_wec;
};

/// Pairs unit i of `first` with unit i of `second` for every WEC, averages
/// both sentences and ranks by `metric` (ascending, or descending when
/// `reverse`), ties broken by sentence text. Pairs where either sentence or
/// the metric is undefined are listed in `undefined_pairs` instead.
DistanceRanking pairwise_distances(const RetrievalResult& first, const RetrievalResult& second, const Metric& metric,
                                   bool reverse, const StopwordList& stopwords);

/// `distance<TAB>sentence1<TAB>sentence2` lines, six decimals.
void write_ranking(const WecRanking& ranking, std::ostream& out);

struct SimilarityMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    /// Row-major, rows x cols; NaN where the metric is undefined.
    std::vector<double> values;

    std::size_t rows() const { return row_labels.size(); }
    std::size_t cols() const { return col_labels.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

/// Cell (i, j) = metric(u1 vector i, u2 vector j); labels are the lookup words.
SimilarityMatrix similarity_matrix(const UnitResult& u1, const UnitResult& u2, const Metric& metric);

enum class HeatmapFormat { Csv, Svg };

/// CSV: header row of column labels after an empty corner cell, then one row
/// per row label with cells printed to six decimals (RFC 4180 quoting).
/// SVG: one `<rect class="cell">` per cell, linear grayscale over the
/// matrix's finite [min, max] with black at max, labels along both axes.
void export_heatmap(const SimilarityMatrix& matrix, const std::filesystem::path& path, HeatmapFormat format);

SimilarityMatrix read_heatmap_csv(const std::filesystem::path& path);

} // namespace wombat

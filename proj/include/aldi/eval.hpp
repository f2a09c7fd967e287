#pragma once

#include "aldi/labels.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aldi::eval {

/// Discord is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    [[nodiscard]] std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

struct ConfusionResult {
    ConfusionMatrix matrix;
    std::size_t excluded_unevaluable = 0; ///< shared keys dropped for being unevaluable on either side
    std::size_t unmatched = 0;            ///< keys present on only one side
};

/// Counts over keys present in both sets. Throws std::invalid_argument on a
/// granularity mismatch or when no evaluable key is shared.
[[nodiscard]] ConfusionResult confusion(const LabelSet& pred, const LabelSet& truth);

/// nullopt marks an undefined ratio (zero denominator).
struct Rates {
    std::optional<double> tpr;
    std::optional<double> fpr;
};

[[nodiscard]] Rates tpr_fpr(const ConfusionMatrix& cm);

/// (tpr + 1 - fpr) / 2, the area under the two-segment ROC of a hard labeller.
[[nodiscard]] std::optional<double> binary_auc(const ConfusionMatrix& cm);

/// Rank (Mann-Whitney) AUC of `scores` against the evaluable keys of `truth`
/// they share; ties count one half. Throws std::invalid_argument unless both
/// classes are present among the shared keys.
[[nodiscard]] double roc_auc(const std::map<LabelKey, double>& scores, const LabelSet& truth);

/// Scores 1/0 from hard labels (unevaluable keys skipped).
[[nodiscard]] std::map<LabelKey, double> label_scores(const LabelSet& labels);
/// Scores from the attached D-values, where present.
[[nodiscard]] std::map<LabelKey, double> dvalue_scores(const LabelSet& labels);

/// Root mean squared log error with natural log. Throws
/// std::invalid_argument on length mismatch, empty input or negative values.
[[nodiscard]] double rmsle(std::span<const double> a, std::span<const double> b);

struct HarmonizeOptions {
    /// Convert building-hour sides to building-day with this hour threshold.
    std::optional<int> to_daily;
    /// Broadcast site-day predictions onto the truth's building-day keys.
    bool broadcast = false;
};

/// Converts `pred` (and possibly `truth`) to a common granularity as allowed by
/// `options`. Throws std::invalid_argument if they still differ afterwards.
[[nodiscard]] std::pair<LabelSet, LabelSet> harmonize(const LabelSet& pred, const LabelSet& truth,
                                                      const HarmonizeOptions& options);

struct MethodReport {
    std::string name;
    bool failed = false;
    std::string error;
    ConfusionMatrix matrix;
    std::size_t excluded_unevaluable = 0;
    Rates rates;
    std::optional<double> roc_auc;        ///< from hard labels
    std::optional<double> roc_auc_scores; ///< from D-values, when the labeller provides them
    std::vector<double> runtime_runs;     ///< seconds
    double runtime_mean = 0.0;            ///< seconds

    [[nodiscard]] long long runtime_rounded() const;
};

struct BenchmarkReport {
    std::vector<MethodReport> methods;
};

struct Labeler {
    std::string name;
    std::function<LabelSet()> run;
};

/// Runs each labeller `runs` times back to back, timing only `run()`, then
/// scores the last run against `truth` after harmonizing. A labeller that
/// throws is reported as failed without affecting the others.
[[nodiscard]] BenchmarkReport benchmark(std::span<const Labeler> labelers, const LabelSet& truth, std::size_t runs = 10,
                                        const HarmonizeOptions& options = {});

void write_report_csv(std::ostream& out, const BenchmarkReport& report);
void write_report_table(std::ostream& out, const BenchmarkReport& report);
void write_confusion_csv(std::ostream& out, const BenchmarkReport& report);

} // namespace aldi::eval

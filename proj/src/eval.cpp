#include "aldi/eval.hpp"

#include "aldi/csv.hpp"
#include "aldi/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace aldi::eval {

ConfusionResult confusion(const LabelSet& pred, const LabelSet& truth) {
    if (pred.granularity() != truth.granularity()) {
        throw std::invalid_argument(std::string("confusion: granularity mismatch (") +
                                    std::string(to_string(pred.granularity())) + " vs " +
                                    std::string(to_string(truth.granularity())) + ")");
    }
    ConfusionResult r;
    std::size_t shared = 0;
    for (const auto& [key, p] : pred) {
        const LabelEntry* t = truth.find(key);
        if (t == nullptr) {
            ++r.unmatched;
            continue;
        }
        ++shared;
        if (p.label == Label::Unevaluable || t->label == Label::Unevaluable) {
            ++r.excluded_unevaluable;
            continue;
        }
        const bool predicted = p.label == Label::Discord;
        const bool actual = t->label == Label::Discord;
        if (predicted && actual) ++r.matrix.tp;
        else if (predicted) ++r.matrix.fp;
        else if (actual) ++r.matrix.fn;
        else ++r.matrix.tn;
    }
    r.unmatched += truth.size() - shared;
    if (r.matrix.total() == 0) {
        throw std::invalid_argument("confusion: predictions and truth share no evaluable key");
    }
    return r;
}

Rates tpr_fpr(const ConfusionMatrix& cm) {
    Rates r;
    if (cm.tp + cm.fn > 0) {
        r.tpr = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    }
    if (cm.fp + cm.tn > 0) {
        r.fpr = static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
    }
    return r;
}

std::optional<double> binary_auc(const ConfusionMatrix& cm) {
    const auto r = tpr_fpr(cm);
    if (!r.tpr || !r.fpr) {
        return std::nullopt;
    }
    return (*r.tpr + 1.0 - *r.fpr) / 2.0;
}

double roc_auc(const std::map<LabelKey, double>& scores, const LabelSet& truth) {
    std::vector<std::pair<double, bool>> points;
    for (const auto& [key, score] : scores) {
        const LabelEntry* t = truth.find(key);
        if (t == nullptr || t->label == Label::Unevaluable) continue;
        points.emplace_back(score, t->label == Label::Discord);
    }
    const auto n_pos = static_cast<double>(std::count_if(points.begin(), points.end(), [](auto& p) { return p.second; }));
    const double n_neg = static_cast<double>(points.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) {
        throw std::invalid_argument("roc_auc: truth needs both discord and non-discord keys");
    }
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        while (j < points.size() && points[j].first == points[i].first) ++j;
        // ranks i+1 .. j share their average
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (points[k].second) rank_sum += avg_rank;
        }
        i = j;
    }
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::map<LabelKey, double> label_scores(const LabelSet& labels) {
    std::map<LabelKey, double> out;
    for (const auto& [key, entry] : labels) {
        if (entry.label != Label::Unevaluable) {
            out.emplace(key, entry.label == Label::Discord ? 1.0 : 0.0);
        }
    }
    return out;
}

std::map<LabelKey, double> dvalue_scores(const LabelSet& labels) {
    std::map<LabelKey, double> out;
    for (const auto& [key, entry] : labels) {
        if (entry.label != Label::Unevaluable && entry.d_value) {
            out.emplace(key, *entry.d_value);
        }
    }
    return out;
}

double rmsle(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("rmsle: length mismatch");
    }
    if (a.empty()) {
        throw std::invalid_argument("rmsle: empty input");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] >= 0.0) || !(b[i] >= 0.0)) {
            throw std::invalid_argument("rmsle: values must be non-negative");
        }
        const double diff = std::log1p(a[i]) - std::log1p(b[i]);
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

std::pair<LabelSet, LabelSet> harmonize(const LabelSet& pred, const LabelSet& truth, const HarmonizeOptions& options) {
    LabelSet p = pred;
    LabelSet t = truth;
    if (options.to_daily) {
        if (p.granularity() == Granularity::BuildingHour) p = detect::hourly_to_daily(p, *options.to_daily);
        if (t.granularity() == Granularity::BuildingHour) t = detect::hourly_to_daily(t, *options.to_daily);
    }
    if (options.broadcast && p.granularity() == Granularity::SiteDay && t.granularity() == Granularity::BuildingDay) {
        p = detect::broadcast_site_days(p, t);
    }
    if (p.granularity() != t.granularity()) {
        throw std::invalid_argument(std::string("granularity mismatch: predictions are ") +
                                    std::string(to_string(p.granularity())) + ", truth is " +
                                    std::string(to_string(t.granularity())) +
                                    " (use --to-daily / --broadcast to convert)");
    }
    return {std::move(p), std::move(t)};
}

long long MethodReport::runtime_rounded() const { return std::llround(runtime_mean); }

BenchmarkReport benchmark(std::span<const Labeler> labelers, const LabelSet& truth, std::size_t runs,
                          const HarmonizeOptions& options) {
    if (runs == 0) {
        throw std::invalid_argument("benchmark: runs must be at least 1");
    }
    BenchmarkReport report;
    for (const auto& labeler : labelers) {
        MethodReport m;
        m.name = labeler.name;
        try {
            LabelSet last;
            for (std::size_t r = 0; r < runs; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                last = labeler.run();
                const auto t1 = std::chrono::steady_clock::now();
                m.runtime_runs.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            m.runtime_mean = std::accumulate(m.runtime_runs.begin(), m.runtime_runs.end(), 0.0) /
                             static_cast<double>(m.runtime_runs.size());
            auto [pred, aligned_truth] = harmonize(last, truth, options);
            const auto cm = confusion(pred, aligned_truth);
            m.matrix = cm.matrix;
            m.excluded_unevaluable = cm.excluded_unevaluable;
            m.rates = tpr_fpr(m.matrix);
            m.roc_auc = binary_auc(m.matrix);
            const auto scores = dvalue_scores(pred);
            if (!scores.empty()) {
                try {
                    m.roc_auc_scores = roc_auc(scores, aligned_truth);
                } catch (const std::invalid_argument&) {
                    // single-class overlap: leave undefined
                }
            }
        } catch (const std::exception& e) {
            m.failed = true;
            m.error = e.what();
        }
        report.methods.push_back(std::move(m));
    }
    return report;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string("undefined"); }

std::string fixed(const std::optional<double>& v, int digits) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    return buf;
}

} // namespace

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "method,status,tp,fp,tn,fn,tpr,fpr,roc_auc,roc_auc_scores,runs,runtime_mean_s,runtime_rounded_s,error\n";
    for (const auto& m : report.methods) {
        out << m.name << ',' << (m.failed ? "failed" : "ok") << ',' << m.matrix.tp << ',' << m.matrix.fp << ','
            << m.matrix.tn << ',' << m.matrix.fn << ',' << opt(m.rates.tpr) << ',' << opt(m.rates.fpr) << ','
            << opt(m.roc_auc) << ',' << opt(m.roc_auc_scores) << ',' << m.runtime_runs.size() << ','
            << csv::format_double(m.runtime_mean) << ',' << m.runtime_rounded() << ",\"";
        for (char c : m.error) {
            out << (c == '"' ? std::string("\"\"") : std::string(1, c));
        }
        out << "\"\n";
    }
}

void write_report_table(std::ostream& out, const BenchmarkReport& report) {
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %8s %7s %7s %8s %9s %10s\n", "method", "tp", "fp", "tn", "fn",
                  "tpr", "fpr", "roc_auc", "auc(D)", "time[s]");
    out << line;
    for (const auto& m : report.methods) {
        if (m.failed) {
            out << m.name << "  FAILED: " << m.error << '\n';
            continue;
        }
        std::snprintf(line, sizeof line, "%-10s %8zu %8zu %8zu %8zu %7s %7s %8s %9s %10.3f\n", m.name.c_str(),
                      m.matrix.tp, m.matrix.fp, m.matrix.tn, m.matrix.fn, fixed(m.rates.tpr, 3).c_str(),
                      fixed(m.rates.fpr, 3).c_str(), fixed(m.roc_auc, 4).c_str(),
                      fixed(m.roc_auc_scores, 4).c_str(), m.runtime_mean);
        out << line;
    }
}

void write_confusion_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "method,truth,predicted,count\n";
    for (const auto& m : report.methods) {
        if (m.failed) continue;
        out << m.name << ",1,1," << m.matrix.tp << '\n';
        out << m.name << ",1,0," << m.matrix.fn << '\n';
        out << m.name << ",0,1," << m.matrix.fp << '\n';
        out << m.name << ",0,0," << m.matrix.tn << '\n';
    }
}

} // namespace aldi::eval

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "virtree/corpus.hpp"
#include "virtree/parser.hpp"

namespace virtree {

struct ModuleRecord {
    std::string id;
    int widgets = 0;
    int virtual_widgets = 0;
    double time_us = 0;  // trimmed mean over the timed repeats
};

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    std::optional<double> r2;  // absent for degenerate inputs
};

struct BenchReport {
    std::vector<ModuleRecord> modules;
    ParseStats aggregate;       // one deterministic run per module
    LinearFit time_fit;         // time in ms vs native widget count
    LinearFit virtual_fit;      // virtual node count vs native widget count
    std::vector<std::string> warnings;

    double max_module_ms() const;
    long total_widgets() const;
    long total_virtual_widgets() const;
};

/// Ordinary least squares on untransformed values.
LinearFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Mean after dropping the given number of extremes from either end.
double trimmed_mean(std::vector<double> samples, int drop_low, int drop_high);

/// The measurement protocol: per module, one warmup parse, `repeats`
/// timed parses with the extremes dropped. Model loading and
/// tokenization stay outside the timed region, so the numbers isolate
/// the parse. Unreadable modules are skipped with a warning.
BenchReport run_bench(const std::string& corpus_dir,
                      const std::vector<VirtualWidgetDef>& defs, const Metamodel& mm,
                      const BenchConfig& config);

std::string format_report(const BenchReport& report);

/// Line-delimited records, one JSON object per module.
void write_records(const BenchReport& report, const std::string& path);

} // namespace virtree

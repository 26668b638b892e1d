#include "virtree/bench.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "virtree/synthesis.hpp"

namespace virtree {

namespace fs = std::filesystem;

double BenchReport::max_module_ms() const {
    double max_us = 0;
    for (const ModuleRecord& m : modules) max_us = std::max(max_us, m.time_us);
    return max_us / 1000.0;
}

long BenchReport::total_widgets() const {
    long n = 0;
    for (const ModuleRecord& m : modules) n += m.widgets;
    return n;
}

long BenchReport::total_virtual_widgets() const {
    long n = 0;
    for (const ModuleRecord& m : modules) n += m.virtual_widgets;
    return n;
}

LinearFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit fit;
    size_t n = std::min(x.size(), y.size());
    if (n < 2) {
        if (n == 1) fit.intercept = y[0];
        return fit;
    }
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) {
        fit.intercept = my;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < n; ++i) {
        double predicted = fit.slope * x[i] + fit.intercept;
        ss_res += (y[i] - predicted) * (y[i] - predicted);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    if (ss_tot > 0) fit.r2 = 1.0 - ss_res / ss_tot;
    return fit;
}

double trimmed_mean(std::vector<double> samples, int drop_low, int drop_high) {
    if (static_cast<int>(samples.size()) <= drop_low + drop_high)
        throw Error("trimmed mean needs more samples than dropped extremes");
    std::sort(samples.begin(), samples.end());
    double sum = 0;
    int kept = 0;
    for (int i = drop_low; i < static_cast<int>(samples.size()) - drop_high; ++i) {
        sum += samples[i];
        ++kept;
    }
    return sum / kept;
}

BenchReport run_bench(const std::string& corpus_dir,
                      const std::vector<VirtualWidgetDef>& defs, const Metamodel& mm,
                      const BenchConfig& config) {
    if (config.repeats <= config.drop_high + config.drop_low)
        throw Error("bench config: repeats must exceed drop-high + drop-low");
    if (!fs::is_directory(corpus_dir))
        throw Error("'" + corpus_dir + "' is not a directory");

    VirtualMetamodel vmm = extend_metamodel(mm, defs);
    ParserTables tables = build_tables(generate_grammar(vmm, defs));

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".xml")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());

    BenchReport report;
    using clock = std::chrono::steady_clock;
    for (const std::string& file : files) {
        Model model;
        try {
            std::ifstream in(file, std::ios::binary);
            if (!in) throw Error("cannot open file");
            std::ostringstream buf;
            buf << in.rdbuf();
            model = load_model(buf.str(), file);
        } catch (const std::exception& e) {
            report.warnings.push_back("skipped " + file + ": " + e.what());
            continue;
        }

        std::vector<Token> tokens = tokenize(model, mm);
        ParseResult warm = parse(tokens, tables, defs);  // warmup, also yields stats

        std::vector<double> times_us;
        times_us.reserve(config.repeats);
        for (int r = 0; r < config.repeats; ++r) {
            auto t0 = clock::now();
            ParseResult run = parse(tokens, tables, defs);
            auto t1 = clock::now();
            times_us.push_back(
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() / 1000.0);
        }

        ModuleRecord record;
        record.id = fs::path(file).stem().string();
        record.widgets = count_widgets(model.root);
        record.virtual_widgets = count_virtual_nodes(warm.model);
        record.time_us = trimmed_mean(std::move(times_us), config.drop_low, config.drop_high);
        report.aggregate.add(warm.stats);
        report.modules.push_back(std::move(record));
    }

    std::vector<double> widgets, time_ms, virtuals;
    for (const ModuleRecord& m : report.modules) {
        widgets.push_back(m.widgets);
        time_ms.push_back(m.time_us / 1000.0);
        virtuals.push_back(m.virtual_widgets);
    }
    report.time_fit = ols_fit(widgets, time_ms);
    report.virtual_fit = ols_fit(widgets, virtuals);
    return report;
}

namespace {

void print_fit(std::ostream& out, const char* label, const char* lhs, const LinearFit& fit) {
    out << label << ": " << lhs << " = " << std::setprecision(6) << fit.slope << "*n "
        << (fit.intercept < 0 ? "- " : "+ ") << std::abs(fit.intercept) << "  (R^2 = ";
    if (fit.r2)
        out << std::setprecision(3) << *fit.r2;
    else
        out << "n/a";
    out << ")\n";
}

} // namespace

std::string format_report(const BenchReport& report) {
    std::ostringstream out;
    out << "modules: " << report.modules.size();
    if (!report.warnings.empty()) out << " (skipped: " << report.warnings.size() << ")";
    out << "\n";
    out << "total native widgets: " << report.total_widgets() << "\n";
    out << "total virtual widgets: " << report.total_virtual_widgets() << "\n";
    out << format_stats(report.aggregate);
    out << std::fixed;
    print_fit(out, "fit time-vs-widgets", "t_ms", report.time_fit);
    print_fit(out, "fit virtual-vs-native", "v", report.virtual_fit);
    out << std::setprecision(3) << "max module parse time: " << report.max_module_ms()
        << " ms\n";
    for (const std::string& warning : report.warnings) out << "warning: " << warning << "\n";
    return out.str();
}

void write_records(const BenchReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write records file '" + path + "'");
    for (const ModuleRecord& m : report.modules) {
        nlohmann::json record = {
            {"id", m.id},
            {"widgets", m.widgets},
            {"virtual_widgets", m.virtual_widgets},
            {"time_us", m.time_us},
        };
        out << record.dump() << "\n";
    }
}

} // namespace virtree

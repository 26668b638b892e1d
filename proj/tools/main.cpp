// virtree command line: validation, grammar/table dumps, virtualization,
// synthesis, pattern switching, synthetic corpora and the bench protocol.
//
// Exit codes: 0 success, 1 domain error (validation, parsing, bad
// arguments against the model), 2 usage or I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "virtree/bench.hpp"
#include "virtree/corpus.hpp"
#include "virtree/parser.hpp"
#include "virtree/synthesis.hpp"
#include "virtree/virtual_model.hpp"

namespace fs = std::filesystem;
using namespace virtree;

namespace {

struct IoError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
}

struct Inputs {
    Metamodel mm;
    std::vector<VirtualWidgetDef> defs;
};

Inputs load_inputs(const std::string& defs_dir, const std::string& metamodel_file) {
    if (!fs::exists(metamodel_file)) throw IoError("no such file: " + metamodel_file);
    if (!fs::is_directory(defs_dir)) throw IoError("no such directory: " + defs_dir);
    Inputs in;
    in.mm = load_metamodel_file(metamodel_file);
    in.defs = load_defs_dir(defs_dir);
    return in;
}

Model load_model_file(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path);
    return load_model(read_file(path), path);
}

ParserTables tables_for(const Inputs& in, const std::string& root_class = {}) {
    VirtualMetamodel vmm = extend_metamodel(in.mm, in.defs);
    return build_tables(generate_grammar(vmm, in.defs, root_class));
}

void require_valid_defs(const Inputs& in) {
    auto diags = validate_defs(in.defs, in.mm);
    if (!diags.empty()) {
        for (const Diagnostic& d : diags) std::cerr << d.message << "\n";
        throw Error("definition validation failed");
    }
}

IdAllocator allocator_for(const VirtualModel& vm) {
    IdAllocator ids;
    for_each_vnode(vm.root, [&](const VNode& node) {
        if (const NativeVNode* n = node.as_native()) {
            ids.reserve(n->id);
        } else if (const VirtualNode* v = node.as_virtual()) {
            ids.reserve(v->id);
            for (const Widget& w : v->provenance)
                for_each_widget(w, [&](const Widget& p) { ids.reserve(p.id); });
        }
    });
    return ids;
}

std::pair<int, int> parse_range(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        int v = std::stoi(text);
        return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bidirectional virtualization of widget-tree models"};
    app.require_subcommand(1);
    std::function<void()> run;

    // ---- validate ------------------------------------------------------
    auto* validate_cmd =
        app.add_subcommand("validate", "check virtual widget definitions against a metamodel");
    {
        static std::string defs_dir, mm_file;
        validate_cmd->add_option("defs", defs_dir, "definitions directory")->required();
        validate_cmd->add_option("metamodel", mm_file, "metamodel file")->required();
        validate_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            auto diags = validate_defs(in.defs, in.mm);
            for (const Diagnostic& d : diags) std::cerr << d.message << "\n";
            if (!diags.empty()) throw Error("definition validation failed");
            std::cout << "OK: " << in.defs.size() << " definitions\n";
        }; });
    }

    // ---- virtualize ----------------------------------------------------
    auto* virt_cmd = app.add_subcommand("virtualize", "parse a model into its virtual view");
    {
        static std::string model_file, defs_dir, mm_file, root_id, out_path;
        static bool stats = false;
        virt_cmd->add_option("model", model_file)->required();
        virt_cmd->add_option("defs", defs_dir)->required();
        virt_cmd->add_option("metamodel", mm_file)->required();
        virt_cmd->add_option("--root", root_id, "parse only the subtree under this widget id");
        virt_cmd->add_flag("--stats", stats, "print the parse statistics block");
        virt_cmd->add_option("-o,--output", out_path, "output file (default stdout)");
        virt_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            Model model = load_model_file(model_file);

            ParseResult result = [&] {
                if (root_id.empty())
                    return parse_model(model, tables_for(in), in.defs, in.mm);
                const Widget* w = find_widget(model, root_id);
                if (!w) throw Error("unknown widget id '" + root_id + "'");
                return parse_subtree(model, root_id, tables_for(in, w->class_name), in.defs,
                                     in.mm);
            }();

            write_output(out_path, save_virtual(result.model));
            if (stats) {
                std::ostream& sink = out_path.empty() ? std::cerr : std::cout;
                sink << format_stats(result.stats);
            }
        }; });
    }

    // ---- synthesize ----------------------------------------------------
    auto* synth_cmd =
        app.add_subcommand("synthesize", "instantiate a virtual widget pattern as native XML");
    {
        static std::string def_name, mm_file, defs_dir, out_path;
        static int pattern_index = 0;
        static std::vector<std::string> prop_args;
        synth_cmd->add_option("def", def_name, "virtual widget name")->required();
        synth_cmd->add_option("pattern", pattern_index, "pattern index (1-based)")->required();
        synth_cmd->add_option("metamodel", mm_file)->required();
        synth_cmd->add_option("defs", defs_dir)->required();
        synth_cmd->add_option("--prop", prop_args, "property value as NAME=VALUE");
        synth_cmd->add_option("-o,--output", out_path);
        synth_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            const VirtualWidgetDef* def = find_def(in.defs, def_name);
            if (!def) throw Error("no virtual widget named '" + def_name + "'");

            std::map<std::string, std::string> props;
            for (const std::string& arg : prop_args) {
                auto eq = arg.find('=');
                if (eq == std::string::npos)
                    throw Error("--prop expects NAME=VALUE, got '" + arg + "'");
                props[arg.substr(0, eq)] = arg.substr(eq + 1);
            }
            IdAllocator ids;
            Instantiation inst = instantiate(*def, pattern_index, props, ids);
            write_output(out_path, save_widgets(inst.widgets));
        }; });
    }

    // ---- switch-pattern --------------------------------------------------
    auto* switch_cmd = app.add_subcommand(
        "switch-pattern", "re-synthesize one virtual widget under another pattern");
    {
        static std::string model_file, defs_dir, mm_file, widget_id, out_path;
        static int target = 0;
        switch_cmd->add_option("model", model_file)->required();
        switch_cmd->add_option("defs", defs_dir)->required();
        switch_cmd->add_option("metamodel", mm_file)->required();
        switch_cmd->add_option("--widget", widget_id, "virtual widget id in the parsed view")
            ->required();
        switch_cmd->add_option("--to", target, "target pattern index")->required();
        switch_cmd->add_option("-o,--output", out_path);
        switch_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            Model model = load_model_file(model_file);
            ParseResult result = parse_model(model, tables_for(in), in.defs, in.mm);

            VNode* node = find_vnode(result.model, widget_id);
            if (!node) throw Error("unknown widget id '" + widget_id + "'");
            VirtualNode* v = node->as_virtual();
            if (!v) throw Error("widget '" + widget_id + "' is not a virtual instance");
            const VirtualWidgetDef* def = find_def(in.defs, v->def_name);
            if (!def) throw Error("no definition for '" + v->def_name + "'");

            IdAllocator ids = allocator_for(result.model);
            switch_pattern(*v, *def, target, ids);
            Model rendered = render_native(result.model, in.defs);
            write_output(out_path, save_model(rendered));
        }; });
    }

    // ---- dump-grammar / dump-tables -------------------------------------
    auto* grammar_cmd = app.add_subcommand("dump-grammar", "print the generated grammar");
    {
        static std::string defs_dir, mm_file, root_class;
        grammar_cmd->add_option("defs", defs_dir)->required();
        grammar_cmd->add_option("metamodel", mm_file)->required();
        grammar_cmd->add_option("--root", root_class, "root class (default: metamodel root)");
        grammar_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            VirtualMetamodel vmm = extend_metamodel(in.mm, in.defs);
            std::cout << dump_grammar(generate_grammar(vmm, in.defs, root_class));
        }; });
    }

    auto* tables_cmd = app.add_subcommand("dump-tables", "print the generated parser tables");
    {
        static std::string defs_dir, mm_file, root_class;
        tables_cmd->add_option("defs", defs_dir)->required();
        tables_cmd->add_option("metamodel", mm_file)->required();
        tables_cmd->add_option("--root", root_class);
        tables_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            std::cout << tables_for(in, root_class).dump();
        }; });
    }

    // ---- gen-corpus ------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("gen-corpus", "generate a synthetic model corpus");
    {
        static std::string defs_dir, mm_file, out_dir, screens = "2:5", widgets = "50:200",
                           noise = "mixed";
        static BenchConfig config;
        gen_cmd->add_option("defs", defs_dir)->required();
        gen_cmd->add_option("metamodel", mm_file)->required();
        gen_cmd->add_option("--out", out_dir, "output directory")->required();
        gen_cmd->add_option("--seed", config.seed);
        gen_cmd->add_option("--modules", config.module_count);
        gen_cmd->add_option("--screens", screens, "screens per module, LO:HI");
        gen_cmd->add_option("--widgets", widgets, "widgets per screen, LO:HI");
        gen_cmd->add_option("--ratio", config.pattern_ratio,
                            "share of widgets from pattern instances");
        gen_cmd->add_option("--noise", noise, "clean | mixed | adversarial");
        gen_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            auto [slo, shi] = parse_range(screens);
            auto [wlo, whi] = parse_range(widgets);
            config.screens_per_module = {slo, shi};
            config.widgets_per_screen = {wlo, whi};
            if (noise == "clean")
                config.noise = NoiseProfile::Clean;
            else if (noise == "mixed")
                config.noise = NoiseProfile::Mixed;
            else if (noise == "adversarial")
                config.noise = NoiseProfile::Adversarial;
            else
                throw Error("unknown noise profile '" + noise + "'");
            auto files = gen_corpus(config, in.defs, in.mm, out_dir);
            std::cout << "wrote " << files.size() << " modules to " << out_dir << "\n";
        }; });
    }

    // ---- run-bench -------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("run-bench", "run the measurement protocol");
    {
        static std::string corpus_dir, defs_dir, mm_file, records;
        static BenchConfig config;
        bench_cmd->add_option("corpus", corpus_dir)->required();
        bench_cmd->add_option("defs", defs_dir)->required();
        bench_cmd->add_option("metamodel", mm_file)->required();
        bench_cmd->add_option("--repeats", config.repeats);
        bench_cmd->add_option("--drop-high", config.drop_high);
        bench_cmd->add_option("--drop-low", config.drop_low);
        bench_cmd->add_option("--records", records, "write NDJSON module records here");
        bench_cmd->callback([&] { run = [] {
            Inputs in = load_inputs(defs_dir, mm_file);
            require_valid_defs(in);
            if (!fs::is_directory(corpus_dir)) throw IoError("no such directory: " + corpus_dir);
            BenchReport report = run_bench(corpus_dir, in.defs, in.mm, config);
            std::cout << format_report(report);
            if (!records.empty()) write_records(report, records);
        }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run) run();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

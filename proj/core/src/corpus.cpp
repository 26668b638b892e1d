#include "virtree/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "virtree/synthesis.hpp"

namespace virtree {

namespace fs = std::filesystem;

namespace {

struct Generator {
    std::mt19937_64 rng;
    const BenchConfig& config;
    const std::vector<VirtualWidgetDef>& defs;
    const Metamodel& mm;
    IdAllocator ids;
    std::set<std::string> prefix_classes;  // first node class of every pattern
    std::vector<const WidgetClass*> noise_classes;
    int value_counter = 0;
    int widgets_emitted = 0;

    Generator(uint64_t seed, const BenchConfig& c, const std::vector<VirtualWidgetDef>& d,
              const Metamodel& m)
        : rng(seed), config(c), defs(d), mm(m) {
        for (const VirtualWidgetDef& def : defs)
            for (const Pattern& pattern : def.patterns)
                if (!pattern.root_sequence.empty())
                    prefix_classes.insert(pattern.root_sequence.front().class_name);
        for (const WidgetClass& cls : mm.classes()) {
            if (cls.name == mm.root_class()) continue;
            if (config.noise == NoiseProfile::Clean && prefix_classes.count(cls.name)) continue;
            noise_classes.push_back(&cls);
        }
        if (noise_classes.empty())
            throw Error("metamodel leaves no classes available for noise generation");
    }

    int rand_int(int lo, int hi) {  // inclusive
        if (hi <= lo) return lo;
        return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
    }
    bool chance(double p) { return (rng() % 10000) < static_cast<uint64_t>(p * 10000); }

    std::string random_value(PropertyType type, const ClassProperty* cls_prop) {
        switch (type) {
            case PropertyType::BoolLiteral:
                return chance(0.5) ? "true" : "false";
            case PropertyType::Enum:
                return cls_prop->enum_values[rng() % cls_prop->enum_values.size()];
            case PropertyType::Expression:
                return "Data.Field" + std::to_string(++value_counter);
            default:
                return "Text " + std::to_string(++value_counter);
        }
    }

    std::map<std::string, std::string> random_def_props(const VirtualWidgetDef& def) {
        std::map<std::string, std::string> props;
        for (const PropertyDecl& decl : def.properties) {
            if (!decl.is_required() && chance(0.5)) continue;
            props[decl.name] = decl.type == PropertyDecl::Type::Expression
                                   ? "Data.Field" + std::to_string(++value_counter)
                                   : "Label " + std::to_string(++value_counter);
        }
        return props;
    }

    std::vector<Widget> pattern_instance() {
        const VirtualWidgetDef& def = defs[rng() % defs.size()];
        int pattern = rand_int(1, static_cast<int>(def.patterns.size()));
        return instantiate(def, pattern, random_def_props(def), ids).widgets;
    }

    Widget noise_widget(int depth) {
        const WidgetClass& cls = *noise_classes[rng() % noise_classes.size()];
        return make_widget(cls, depth);
    }

    Widget make_widget(const WidgetClass& cls, int depth) {
        Widget w;
        w.class_name = cls.name;
        w.id = ids.fresh("n");
        for (const ClassProperty& prop : cls.properties)
            if (chance(0.6)) w.properties.set(prop.name, random_value(prop.type, &prop));
        if (cls.is_container && depth < 3) {
            int children = rand_int(0, 3);
            for (int i = 0; i < children; ++i) {
                if (cls.child_constraint == "Widget") {
                    w.children.push_back(noise_widget(depth + 1));
                } else if (const WidgetClass* child = mm.find_class(cls.child_constraint)) {
                    if (config.noise == NoiseProfile::Clean &&
                        prefix_classes.count(child->name))
                        continue;
                    w.children.push_back(make_widget(*child, depth + 1));
                }
            }
        }
        return w;
    }

    // A truncated pattern instance: its leading widgets start a pattern
    // that cannot complete, so the parser explores and retreats.
    std::vector<Widget> decoy(bool long_prefix) {
        const VirtualWidgetDef& def = defs[rng() % defs.size()];
        int pattern_index = rand_int(1, static_cast<int>(def.patterns.size()));
        std::vector<Widget> widgets =
            instantiate(def, pattern_index, random_def_props(def), ids).widgets;
        if (widgets.size() > 1) {
            size_t keep = long_prefix ? widgets.size() - 1 : 1;
            widgets.resize(keep);
        }
        widgets.push_back(noise_widget(1));
        return widgets;
    }

    void append(std::vector<Widget>& out, std::vector<Widget> widgets) {
        for (Widget& w : widgets) {
            widgets_emitted += count_widgets(w);
            out.push_back(std::move(w));
        }
    }

    const WidgetClass* screen_class() const {
        if (const WidgetClass* c = mm.find_class("Container");
            c && c->is_container && c->child_constraint == "Widget")
            return c;
        for (const WidgetClass& c : mm.classes())
            if (c.is_container && c.child_constraint == "Widget" && c.name != mm.root_class())
                return &c;
        throw Error("metamodel has no general-purpose container class for screens");
    }

    Widget screen(int target_widgets) {
        Widget screen;
        screen.class_name = screen_class()->name;
        screen.id = ids.fresh("s");
        int start = widgets_emitted;
        while (widgets_emitted - start < target_widgets) {
            if (!defs.empty() && chance(config.pattern_ratio)) {
                append(screen.children, pattern_instance());
                continue;
            }
            switch (config.noise) {
                case NoiseProfile::Clean:
                    append(screen.children, {noise_widget(1)});
                    break;
                case NoiseProfile::Mixed:
                    if (!defs.empty() && chance(0.12))
                        append(screen.children, decoy(chance(0.3)));
                    else
                        append(screen.children, {noise_widget(1)});
                    break;
                case NoiseProfile::Adversarial: {
                    if (!defs.empty() && chance(0.45)) {
                        int burst = rand_int(1, 4);
                        for (int i = 0; i < burst; ++i)
                            append(screen.children, decoy(chance(0.6)));
                    } else {
                        append(screen.children, {noise_widget(1)});
                    }
                    break;
                }
            }
        }
        widgets_emitted += 1;  // the screen container itself
        return screen;
    }
};

} // namespace

Model generate_module(const BenchConfig& config, const std::vector<VirtualWidgetDef>& defs,
                      const Metamodel& mm, int module_index) {
    uint64_t seed = config.seed * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(module_index);
    Generator gen(seed, config, defs, mm);

    Model model;
    model.root.class_name = mm.root_class();
    model.root.id = gen.ids.fresh("f");
    int screens = gen.rand_int(config.screens_per_module.lo, config.screens_per_module.hi);
    for (int s = 0; s < screens; ++s) {
        int target = gen.rand_int(config.widgets_per_screen.lo, config.widgets_per_screen.hi);
        model.root.children.push_back(gen.screen(target));
    }
    return model;
}

Model generate_screen_model(uint64_t seed, int target_widgets, double pattern_ratio,
                            NoiseProfile noise, const std::vector<VirtualWidgetDef>& defs,
                            const Metamodel& mm) {
    BenchConfig config;
    config.seed = seed;
    config.pattern_ratio = pattern_ratio;
    config.noise = noise;
    Generator gen(seed, config, defs, mm);
    Model model;
    model.root.class_name = mm.root_class();
    model.root.id = gen.ids.fresh("f");
    model.root.children.push_back(gen.screen(target_widgets));
    return model;
}

std::vector<std::string> gen_corpus(const BenchConfig& config,
                                    const std::vector<VirtualWidgetDef>& defs,
                                    const Metamodel& mm, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> paths;
    for (int i = 0; i < config.module_count; ++i) {
        Model model = generate_module(config, defs, mm, i);
        std::ostringstream name;
        name << "mod_" << std::setw(4) << std::setfill('0') << (i + 1) << ".xml";
        fs::path path = fs::path(out_dir) / name.str();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << save_model(model);
        paths.push_back(path.string());
    }
    return paths;
}

} // namespace virtree

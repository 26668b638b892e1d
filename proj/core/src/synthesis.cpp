#include "virtree/synthesis.hpp"

#include <algorithm>

namespace virtree {

const VirtualWidgetDef* find_def(const std::vector<VirtualWidgetDef>& defs,
                                 std::string_view name) {
    for (const VirtualWidgetDef& def : defs)
        if (def.name == name) return &def;
    return nullptr;
}

std::map<std::string, std::string> resolve_properties(
    const VirtualWidgetDef& def, const std::map<std::string, std::string>& props) {
    for (const auto& [name, value] : props)
        if (!def.find_property(name))
            throw Error(def.name + " has no property '" + name + "'");

    std::map<std::string, std::string> resolved = props;
    for (const PropertyDecl& decl : def.properties) {
        if (resolved.count(decl.name)) continue;
        if (decl.is_required())
            throw Error(def.name + ": required property '" + decl.name + "' not supplied");
        resolved[decl.name] = eval_default(*decl.default_expr, resolved);
    }
    return resolved;
}

namespace {

// Source-widget state carried into a pattern switch.
struct SeedEntry {
    std::string widget_id;
    PropertyBag properties;
};

using SeedMap = std::map<std::string, SeedEntry>;

Widget clone_node(const PatternNode& node, IdAllocator& ids, const SeedMap& seeds,
                  std::map<std::string, std::string>& captures) {
    Widget w;
    w.class_name = node.class_name;
    const SeedEntry* seed = nullptr;
    if (!node.id.empty()) {
        if (auto it = seeds.find(node.id); it != seeds.end()) seed = &it->second;
    }
    if (seed) {
        w.id = seed->widget_id;  // the widget survives the switch
        w.properties = seed->properties;
    } else {
        w.id = ids.fresh(node.id.empty() ? "w" : node.id);
        for (const auto& [name, value] : node.default_properties) w.properties.set(name, value);
    }
    for (const auto& [name, value] : node.match_properties) w.properties.set(name, value);
    if (!node.id.empty()) captures[node.id] = w.id;
    for (const PatternNode& child : node.children)
        w.children.push_back(clone_node(child, ids, seeds, captures));
    return w;
}

Widget* find_mutable(std::vector<Widget>& widgets, std::string_view id) {
    for (Widget& w : widgets) {
        if (w.id == id) return &w;
        if (Widget* hit = find_mutable(w.children, id)) return hit;
    }
    return nullptr;
}

Instantiation materialize(const Pattern& pattern,
                          const std::map<std::string, std::string>& resolved,
                          IdAllocator& ids, const SeedMap& seeds) {
    Instantiation out;
    for (const PatternNode& node : pattern.root_sequence)
        out.widgets.push_back(clone_node(node, ids, seeds, out.captures));

    // equations read backwards: native property <- virtual property
    for (const Equation& eq : pattern.bindings) {
        auto cap = out.captures.find(eq.node_id);
        auto val = resolved.find(eq.virtual_prop);
        if (cap == out.captures.end() || val == resolved.end()) continue;
        if (Widget* target = find_mutable(out.widgets, cap->second))
            target->properties.set(eq.native_prop, val->second);
    }
    return out;
}

} // namespace

Instantiation instantiate(const VirtualWidgetDef& def, int pattern_index,
                          const std::map<std::string, std::string>& props,
                          IdAllocator& ids) {
    const Pattern* pattern = def.find_pattern(pattern_index);
    if (!pattern)
        throw Error(def.name + " has no pattern #" + std::to_string(pattern_index));
    return materialize(*pattern, resolve_properties(def, props), ids, {});
}

void switch_pattern(VirtualNode& node, const VirtualWidgetDef& def, int target_index,
                    IdAllocator& ids) {
    if (def.name != node.def_name)
        throw Error("definition '" + def.name + "' does not match node '" + node.def_name + "'");
    const Pattern* target = def.find_pattern(target_index);
    if (!target)
        throw Error(def.name + " has no pattern #" + std::to_string(target_index));

    // switching to the current pattern of a clean node changes nothing
    if (target_index == node.pattern_index && !node.dirty && !node.provenance.empty()) return;

    // collect source widget state for every node id the patterns share
    SeedMap seeds;
    std::vector<const PatternNode*> work;
    auto visit = [&](const PatternNode& n, auto&& self) -> void {
        if (!n.id.empty()) {
            auto cap = node.captures.find(n.id);
            if (cap != node.captures.end()) {
                for (const Widget& root : node.provenance) {
                    const Widget* src = nullptr;
                    for_each_widget(root, [&](const Widget& w) {
                        if (w.id == cap->second) src = &w;
                    });
                    if (src) {
                        seeds[n.id] = {src->id, src->properties};
                        break;
                    }
                }
            }
        }
        for (const PatternNode& c : n.children) self(c, self);
    };
    for (const PatternNode& n : target->root_sequence) visit(n, visit);

    Instantiation inst =
        materialize(*target, resolve_properties(def, node.properties), ids, seeds);
    node.pattern_index = target_index;
    node.captures = std::move(inst.captures);
    node.provenance = std::move(inst.widgets);
    node.dirty = false;
}

void set_virtual_property(VirtualNode& node, const VirtualWidgetDef& def,
                          std::string_view prop, std::string value) {
    const PropertyDecl* decl = def.find_property(prop);
    if (!decl) throw Error(def.name + " has no property '" + std::string(prop) + "'");
    node.properties[std::string(prop)] = value;

    const Pattern* pattern = def.find_pattern(node.pattern_index);
    if (pattern && !node.provenance.empty()) {
        for (const Equation& eq : pattern->bindings) {
            if (eq.virtual_prop != prop) continue;
            auto cap = node.captures.find(eq.node_id);
            if (cap == node.captures.end()) continue;
            if (Widget* target = find_mutable(node.provenance, cap->second))
                target->properties.set(eq.native_prop, value);
        }
    }
    if (node.provenance.empty()) node.dirty = true;
}

} // namespace virtree

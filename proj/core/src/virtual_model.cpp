#include "virtree/virtual_model.hpp"

#include <set>

#include "virtree/synthesis.hpp"
#include "virtree/xml.hpp"

namespace virtree {

namespace {

void save_vnode(const VNode& node, std::string& out, int indent) {
    if (const VirtualNode* v = node.as_virtual()) {
        out.append(indent, ' ');
        out.push_back('<');
        out.append(v->def_name);
        if (!v->id.empty()) {
            out.append(" Id=\"");
            out.append(xml::escape_attr(v->id));
            out.push_back('"');
        }
        out.append(" Pattern=\"");
        out.append(std::to_string(v->pattern_index));
        out.push_back('"');
        for (const auto& [name, value] : v->properties) {
            out.push_back(' ');
            out.append(name);
            out.append("=\"");
            out.append(xml::escape_attr(value));
            out.push_back('"');
        }
        out.append("/>\n");
        return;
    }
    const NativeVNode& n = *node.as_native();
    out.append(indent, ' ');
    out.push_back('<');
    out.append(n.class_name);
    if (!n.id.empty()) {
        out.append(" Id=\"");
        out.append(xml::escape_attr(n.id));
        out.push_back('"');
    }
    for (const auto& [name, value] : n.properties) {
        out.push_back(' ');
        out.append(name);
        out.append("=\"");
        out.append(xml::escape_attr(value));
        out.push_back('"');
    }
    if (n.children.empty()) {
        out.append("/>\n");
        return;
    }
    out.append(">\n");
    for (const VNode& child : n.children) save_vnode(child, out, indent + 2);
    out.append(indent, ' ');
    out.append("</");
    out.append(n.class_name);
    out.append(">\n");
}

} // namespace

std::string save_virtual(const VirtualModel& vm) {
    std::string out;
    save_vnode(vm.root, out, 0);
    return out;
}

namespace {

std::vector<Widget> render_vnode(VNode& node, const std::vector<VirtualWidgetDef>& defs,
                                 IdAllocator& ids) {
    if (NativeVNode* n = node.as_native()) {
        Widget w;
        w.class_name = n->class_name;
        w.id = n->id;
        w.properties = n->properties;
        for (VNode& child : n->children)
            for (Widget& rendered : render_vnode(child, defs, ids))
                w.children.push_back(std::move(rendered));
        return {std::move(w)};
    }
    VirtualNode& v = *node.as_virtual();
    if (!v.dirty && !v.provenance.empty()) return v.provenance;
    const VirtualWidgetDef* def = find_def(defs, v.def_name);
    if (!def) throw Error("no definition for virtual widget '" + v.def_name + "'");
    Instantiation inst = instantiate(*def, v.pattern_index, v.properties, ids);
    v.captures = inst.captures;
    v.provenance = inst.widgets;
    v.dirty = false;
    return v.provenance;
}

} // namespace

Model render_native(VirtualModel& vm, const std::vector<VirtualWidgetDef>& defs) {
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

    std::vector<Widget> rendered = render_vnode(vm.root, defs, ids);
    if (rendered.size() != 1 || !vm.root.as_native())
        throw Error("virtual model root must be a single native widget");
    Model model;
    model.root = std::move(rendered.front());
    model.source_uri = vm.source_uri;
    return model;
}

void assign_virtual_ids(VirtualModel& vm) {
    std::set<std::string> used;
    for_each_vnode(vm.root, [&](const VNode& node) {
        if (const NativeVNode* n = node.as_native()) {
            used.insert(n->id);
        } else if (const VirtualNode* v = node.as_virtual()) {
            if (!v->id.empty()) used.insert(v->id);
            for (const Widget& w : v->provenance)
                for_each_widget(w, [&](const Widget& p) { used.insert(p.id); });
        }
    });

    int counter = 1;
    auto assign = [&](VNode& node, auto&& self) -> void {
        if (VirtualNode* v = node.as_virtual()) {
            if (v->id.empty()) {
                for (;;) {
                    std::string candidate = "v" + std::to_string(counter++);
                    if (used.insert(candidate).second) {
                        v->id = std::move(candidate);
                        break;
                    }
                }
            }
        } else if (NativeVNode* n = node.as_native()) {
            for (VNode& child : n->children) self(child, self);
        }
    };
    assign(vm.root, assign);
}

VNode* find_vnode(VirtualModel& vm, std::string_view id) {
    VNode* hit = nullptr;
    auto walk = [&](VNode& node, auto&& self) -> void {
        if (hit) return;
        if (const VirtualNode* v = node.as_virtual()) {
            if (v->id == id) hit = &node;
            return;
        }
        NativeVNode* n = node.as_native();
        if (n->id == id) {
            hit = &node;
            return;
        }
        for (VNode& child : n->children) self(child, self);
    };
    walk(vm.root, walk);
    return hit;
}

int count_virtual_nodes(const VirtualModel& vm) {
    int n = 0;
    for_each_vnode(vm.root, [&](const VNode& node) {
        if (node.is_virtual()) ++n;
    });
    return n;
}

int count_vnodes(const VirtualModel& vm) {
    int n = 0;
    for_each_vnode(vm.root, [&](const VNode&) { ++n; });
    return n;
}

} // namespace virtree

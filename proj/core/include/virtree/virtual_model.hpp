#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "virtree/defs.hpp"
#include "virtree/model.hpp"

namespace virtree {

struct VNode;

/// Native widget inside the abstract tree. Unlike Widget, its children
/// may be virtual (containment is relaxed in the virtual metamodel).
struct NativeVNode {
    std::string class_name;
    std::string id;
    PropertyBag properties;
    std::vector<VNode> children;
};

/// Virtual widget instance. `provenance` holds the exact native sibling
/// slice the instance stands for; rendering an unedited node replays it
/// verbatim, which is what makes the round trip loss-free.
struct VirtualNode {
    std::string def_name;
    int pattern_index = 0;
    std::string id;
    std::map<std::string, std::string> properties;
    std::map<std::string, std::string> captures;  // pattern node id -> widget id
    std::vector<Widget> provenance;
    bool dirty = false;
};

struct VNode {
    std::variant<NativeVNode, VirtualNode> node;

    bool is_virtual() const { return std::holds_alternative<VirtualNode>(node); }
    NativeVNode* as_native() { return std::get_if<NativeVNode>(&node); }
    const NativeVNode* as_native() const { return std::get_if<NativeVNode>(&node); }
    VirtualNode* as_virtual() { return std::get_if<VirtualNode>(&node); }
    const VirtualNode* as_virtual() const { return std::get_if<VirtualNode>(&node); }
};

struct VirtualModel {
    VNode root;
    std::string source_uri;
};

/// Canonical XML of the abstract view. Virtual instances serialize as
/// `<DefName Id=".." Pattern="n" Prop="v" .../>`; native nodes follow the
/// model serialization rules. The view is derived output: reading it back
/// as a full-fidelity model is out of scope.
std::string save_virtual(const VirtualModel& vm);

/// Renders back to the native model. Clean virtual nodes emit their
/// provenance; dirty or provenance-less ones are synthesized first and
/// their provenance refreshed in place.
Model render_native(VirtualModel& vm, const std::vector<VirtualWidgetDef>& defs);

/// Gives every virtual node without an id a fresh `v<n>` id, skipping
/// everything already used by native nodes, provenance widgets or other
/// virtual nodes.
void assign_virtual_ids(VirtualModel& vm);

/// Finds any node (native or virtual) by id; nullptr when absent.
VNode* find_vnode(VirtualModel& vm, std::string_view id);

int count_virtual_nodes(const VirtualModel& vm);
int count_vnodes(const VirtualModel& vm);

template <typename Fn>
void for_each_vnode(const VNode& node, Fn&& fn) {
    fn(node);
    if (const NativeVNode* n = node.as_native())
        for (const VNode& child : n->children) for_each_vnode(child, fn);
}

} // namespace virtree

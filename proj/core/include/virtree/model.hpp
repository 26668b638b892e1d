#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "virtree/error.hpp"

namespace virtree {

/// Widget properties: unique names mapped to untyped text values. Values
/// that denote model expressions (`Request.Approved`) are kept verbatim.
/// Storage is name-sorted, so structural comparison and serialization are
/// insensitive to the attribute order of the input.
class PropertyBag {
public:
    using Map = std::map<std::string, std::string, std::less<>>;
    using const_iterator = Map::const_iterator;

    /// `Id` is reserved for widget identifiers and never lives in a bag.
    void set(std::string name, std::string value);

    const std::string* find(std::string_view name) const;
    std::string get_or(std::string_view name, std::string fallback = {}) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    void erase(std::string_view name);

    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    const_iterator begin() const { return entries_.begin(); }
    const_iterator end() const { return entries_.end(); }

    bool operator==(const PropertyBag&) const = default;

private:
    Map entries_;
};

/// One node of a native widget tree.
struct Widget {
    std::string class_name;
    std::string id;
    PropertyBag properties;
    std::vector<Widget> children;

    bool operator==(const Widget&) const = default;
};

struct Model {
    Widget root;
    std::string source_uri;

    bool operator==(const Model& other) const { return root == other.root; }
};

/// Loads a model from XML text. Element names are widget classes,
/// attributes are properties, `Id` is the widget identifier. Widgets
/// without an `Id` receive fresh `w<n>` identifiers in document order.
/// Throws xml::ParseError on malformed input and Error on duplicate ids
/// or reserved attributes (`Default.*` belongs to pattern files only).
Model load_model(std::string_view xml_text, std::string source_uri = {});

/// Canonical serialization: `Id` first, remaining attributes sorted by
/// name, 2-space indentation, self-closing tags for childless widgets,
/// trailing newline. load_model(save_model(m)) is structurally equal to m.
std::string save_model(const Model& model);

/// Canonical form of a sibling sequence (no document root), used for
/// synthesized subtrees.
std::string save_widgets(const std::vector<Widget>& widgets);

/// Preorder search by id; nullptr when absent.
const Widget* find_widget(const Model& model, std::string_view id);

/// Smallest `prefix<n>` (n >= 1) not used anywhere in the model.
std::string fresh_id(const Model& model, std::string_view prefix);

/// Stateful fresh-id source used where several widgets are created
/// against one reservation set (synthesis, corpus generation).
class IdAllocator {
public:
    IdAllocator() = default;
    explicit IdAllocator(const Model& model) { seed_from(model.root); }

    void reserve(const std::string& id) { used_.insert(id); }
    bool is_used(std::string_view id) const { return used_.count(id) > 0; }
    void seed_from(const Widget& subtree);
    std::string fresh(std::string_view prefix);

private:
    std::set<std::string, std::less<>> used_;
    std::map<std::string, int, std::less<>> next_suffix_;
};

/// Preorder visit of a subtree.
template <typename Fn>
void for_each_widget(const Widget& widget, Fn&& fn) {
    fn(widget);
    for (const Widget& child : widget.children) for_each_widget(child, fn);
}

int count_widgets(const Widget& widget);

} // namespace virtree

#include "virtree/model.hpp"

#include <algorithm>
#include <sstream>

#include "virtree/xml.hpp"

namespace virtree {

void PropertyBag::set(std::string name, std::string value) {
    if (name == "Id")
        throw Error("'Id' is reserved and cannot be used as a property name");
    entries_[std::move(name)] = std::move(value);
}

const std::string* PropertyBag::find(std::string_view name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string PropertyBag::get_or(std::string_view name, std::string fallback) const {
    const std::string* v = find(name);
    return v ? *v : std::move(fallback);
}

void PropertyBag::erase(std::string_view name) {
    auto it = entries_.find(name);
    if (it != entries_.end()) entries_.erase(it);
}

namespace {

struct IdOccurrence {
    int line;
    int col;
};

Widget build_widget(const xml::Element& elem,
                    std::map<std::string, IdOccurrence>& seen_ids) {
    Widget w;
    w.class_name = elem.name;
    for (const xml::Attr& attr : elem.attributes) {
        if (attr.name == "Id") {
            auto [it, inserted] = seen_ids.emplace(attr.value, IdOccurrence{attr.line, attr.col});
            if (!inserted) {
                std::ostringstream msg;
                msg << "duplicate widget id \"" << attr.value << "\" at " << attr.line << ":"
                    << attr.col << " (first used at " << it->second.line << ":"
                    << it->second.col << ")";
                throw Error(msg.str());
            }
            w.id = attr.value;
        } else if (attr.name.rfind("Default.", 0) == 0) {
            std::ostringstream msg;
            msg << "attribute '" << attr.name << "' at " << attr.line << ":" << attr.col
                << " is only allowed in pattern files, not in models";
            throw Error(msg.str());
        } else {
            w.properties.set(attr.name, attr.value);
        }
    }
    for (const xml::Element& child : elem.children)
        w.children.push_back(build_widget(child, seen_ids));
    return w;
}

void assign_missing_ids(Widget& w, std::set<std::string, std::less<>>& used, int& counter) {
    if (w.id.empty()) {
        for (;;) {
            std::string candidate = "w" + std::to_string(counter++);
            if (used.insert(candidate).second) {
                w.id = std::move(candidate);
                break;
            }
        }
    }
    for (Widget& child : w.children) assign_missing_ids(child, used, counter);
}

void save_widget(const Widget& w, std::string& out, int indent) {
    out.append(indent, ' ');
    out.push_back('<');
    out.append(w.class_name);
    if (!w.id.empty()) {
        out.append(" Id=\"");
        out.append(xml::escape_attr(w.id));
        out.push_back('"');
    }
    for (const auto& [name, value] : w.properties) {
        out.push_back(' ');
        out.append(name);
        out.append("=\"");
        out.append(xml::escape_attr(value));
        out.push_back('"');
    }
    if (w.children.empty()) {
        out.append("/>\n");
        return;
    }
    out.append(">\n");
    for (const Widget& child : w.children) save_widget(child, out, indent + 2);
    out.append(indent, ' ');
    out.append("</");
    out.append(w.class_name);
    out.append(">\n");
}

const Widget* find_in_subtree(const Widget& w, std::string_view id) {
    if (w.id == id) return &w;
    for (const Widget& child : w.children)
        if (const Widget* hit = find_in_subtree(child, id)) return hit;
    return nullptr;
}

} // namespace

Model load_model(std::string_view xml_text, std::string source_uri) {
    xml::Element root = xml::parse_document(xml_text);
    std::map<std::string, IdOccurrence> seen_ids;
    Model model;
    model.root = build_widget(root, seen_ids);
    model.source_uri = std::move(source_uri);

    std::set<std::string, std::less<>> used;
    for (const auto& [id, loc] : seen_ids) used.insert(id);
    int counter = 1;
    assign_missing_ids(model.root, used, counter);
    return model;
}

std::string save_model(const Model& model) {
    std::string out;
    save_widget(model.root, out, 0);
    return out;
}

std::string save_widgets(const std::vector<Widget>& widgets) {
    std::string out;
    for (const Widget& w : widgets) save_widget(w, out, 0);
    return out;
}

const Widget* find_widget(const Model& model, std::string_view id) {
    return find_in_subtree(model.root, id);
}

std::string fresh_id(const Model& model, std::string_view prefix) {
    IdAllocator alloc(model);
    return alloc.fresh(prefix);
}

void IdAllocator::seed_from(const Widget& subtree) {
    for_each_widget(subtree, [&](const Widget& w) { used_.insert(w.id); });
}

std::string IdAllocator::fresh(std::string_view prefix) {
    std::string key(prefix);
    int& n = next_suffix_.try_emplace(key, 1).first->second;
    for (;;) {
        std::string candidate = key + std::to_string(n++);
        if (used_.insert(candidate).second) return candidate;
    }
}

int count_widgets(const Widget& widget) {
    int n = 0;
    for_each_widget(widget, [&](const Widget&) { ++n; });
    return n;
}

} // namespace virtree

#include "virtree/defs.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "virtree/xml.hpp"

namespace virtree {

namespace fs = std::filesystem;

const Equation* Pattern::find_binding(std::string_view virtual_prop) const {
    for (const Equation& eq : bindings)
        if (eq.virtual_prop == virtual_prop) return &eq;
    return nullptr;
}

const PropertyDecl* VirtualWidgetDef::find_property(std::string_view name) const {
    for (const PropertyDecl& p : properties)
        if (p.name == name) return &p;
    return nullptr;
}

const Pattern* VirtualWidgetDef::find_pattern(int index) const {
    for (const Pattern& p : patterns)
        if (p.index == index) return &p;
    return nullptr;
}

namespace {

[[noreturn]] void fail(const std::string& file, const xml::Element& at, const std::string& msg) {
    std::ostringstream out;
    out << file << ":" << at.line << ":" << at.col << ": " << msg;
    throw Error(out.str());
}

// Default attribute text: GetLabelFor(<name>) is a call; a bare value
// naming a declared property is a reference; anything else is a literal.
DefaultExpr parse_default_expr(const std::string& text, const VirtualWidgetDef& def) {
    DefaultExpr expr;
    if (text.rfind("GetLabelFor(", 0) == 0 && text.back() == ')') {
        expr.kind = DefaultExpr::Kind::GetLabelFor;
        expr.text = text.substr(12, text.size() - 13);
        return expr;
    }
    if (def.find_property(text)) {
        expr.kind = DefaultExpr::Kind::PropRef;
        expr.text = text;
        return expr;
    }
    expr.kind = DefaultExpr::Kind::Literal;
    expr.text = text;
    return expr;
}

PatternNode parse_pattern_node(const std::string& file, const xml::Element& elem) {
    PatternNode node;
    node.class_name = elem.name;
    for (const xml::Attr& attr : elem.attributes) {
        if (attr.name == "Id") {
            node.id = attr.value;
        } else if (attr.name == "Repeat") {
            if (attr.value != "true" && attr.value != "false")
                fail(file, elem, "Repeat must be \"true\" or \"false\"");
            node.repeated = attr.value == "true";
        } else if (attr.name.rfind("Default.", 0) == 0) {
            node.default_properties.set(attr.name.substr(8), attr.value);
        } else {
            node.match_properties.set(attr.name, attr.value);
        }
    }
    for (const xml::Element& child : elem.children)
        node.children.push_back(parse_pattern_node(file, child));
    return node;
}

VirtualWidgetDef parse_def(const std::string& file, const xml::Element& root) {
    if (root.name != "VirtualWidget")
        fail(file, root, "expected root element <VirtualWidget>");
    VirtualWidgetDef def;
    def.source_path = file;
    if (const std::string* name = root.find_attr("Name"))
        def.name = *name;
    else
        fail(file, root, "<VirtualWidget> needs a Name attribute");

    // raw default texts resolve after every property is known, so a
    // reference may name a property declared later (validation rejects
    // unresolvable orders separately)
    std::vector<std::pair<size_t, std::string>> raw_defaults;

    for (const xml::Element& elem : root.children) {
        if (elem.name == "Property") {
            PropertyDecl decl;
            if (const std::string* n = elem.find_attr("Name"))
                decl.name = *n;
            else
                fail(file, elem, "<Property> needs a Name attribute");
            std::string type = elem.find_attr("Type") ? *elem.find_attr("Type") : "string";
            if (type == "expression")
                decl.type = PropertyDecl::Type::Expression;
            else if (type == "string")
                decl.type = PropertyDecl::Type::String;
            else
                fail(file, elem, "unknown property type '" + type + "'");
            if (const std::string* d = elem.find_attr("Default"))
                raw_defaults.emplace_back(def.properties.size(), *d);
            def.properties.push_back(std::move(decl));
        } else if (elem.name == "Pattern") {
            Pattern pattern;
            pattern.index = static_cast<int>(def.patterns.size()) + 1;
            for (const xml::Element& item : elem.children) {
                if (item.name == "Bind") {
                    const std::string* prop = item.find_attr("Prop");
                    const std::string* to = item.find_attr("To");
                    if (!prop || !to) fail(file, item, "<Bind> needs Prop and To attributes");
                    auto dot = to->find('.');
                    if (dot == std::string::npos || dot == 0 || dot + 1 == to->size())
                        fail(file, item, "binding target must be '<nodeId>.<property>'");
                    pattern.bindings.push_back(
                        {*prop, to->substr(0, dot), to->substr(dot + 1)});
                } else {
                    pattern.root_sequence.push_back(parse_pattern_node(file, item));
                }
            }
            def.patterns.push_back(std::move(pattern));
        } else {
            fail(file, elem, "unexpected element <" + elem.name + ">");
        }
    }
    for (auto& [index, text] : raw_defaults)
        def.properties[index].default_expr = parse_default_expr(text, def);
    return def;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open definition file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

std::vector<VirtualWidgetDef> load_defs(const std::vector<std::string>& files) {
    std::vector<VirtualWidgetDef> defs;
    for (const std::string& path : files) {
        xml::Element root;
        try {
            root = xml::parse_document(read_file(path));
        } catch (const xml::ParseError& e) {
            throw Error(path + ": " + e.what());
        }
        VirtualWidgetDef def = parse_def(path, root);
        def.priority_rank = static_cast<int>(defs.size());
        defs.push_back(std::move(def));
    }
    return defs;
}

std::vector<VirtualWidgetDef> load_defs_dir(const std::string& directory) {
    if (!fs::is_directory(directory))
        throw Error("'" + directory + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".xml")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    return load_defs(files);
}

namespace {

struct DefChecker {
    const VirtualWidgetDef& def;
    const Metamodel& mm;
    std::vector<Diagnostic>& out;

    void report(const std::string& msg) { out.push_back({def.name + ": " + msg, {}}); }

    void check_node(const Pattern& pattern, const PatternNode& node,
                    const WidgetClass* parent_cls, bool inside_repeat,
                    std::vector<std::string>& ids) {
        const WidgetClass* cls = mm.find_class(node.class_name);
        std::string where = "pattern #" + std::to_string(pattern.index);
        if (!cls) {
            report(where + " uses unknown class '" + node.class_name + "'");
            return;
        }
        if (!node.id.empty()) {
            if (std::find(ids.begin(), ids.end(), node.id) != ids.end())
                report(where + " reuses node id '" + node.id + "'");
            ids.push_back(node.id);
            if (inside_repeat || node.repeated)
                report(where + ": node id '" + node.id +
                       "' inside a repeated group cannot be captured");
        }
        if (node.repeated && inside_repeat)
            report(where + ": nested repetition is not supported");
        if (parent_cls && parent_cls->child_constraint != "Widget" &&
            node.class_name != parent_cls->child_constraint)
            report(where + ": '" + parent_cls->name + "' may only contain '" +
                   parent_cls->child_constraint + "', found '" + node.class_name + "'");
        if (!cls->is_container && !node.children.empty())
            report(where + ": leaf class '" + node.class_name + "' has children");

        for (const auto& [name, value] : node.match_properties) {
            const ClassProperty* prop = cls->find_property(name);
            if (!prop) {
                report(where + ": condition on undeclared property '" + node.class_name + "." +
                       name + "'");
            } else if (!prop->is_enumerated()) {
                report(where + ": condition on '" + node.class_name + "." + name +
                       "' needs an enumerated property type");
            } else if (!prop->allows_value(value)) {
                report(where + ": condition value \"" + value + "\" is not declared for '" +
                       node.class_name + "." + name + "'");
            }
            if (node.default_properties.contains(name))
                report(where + ": '" + name + "' is both a condition and a default on '" +
                       node.class_name + "'");
        }
        for (const auto& [name, value] : node.default_properties) {
            if (!cls->find_property(name))
                report(where + ": default for undeclared property '" + node.class_name + "." +
                       name + "'");
        }
        bool next_inside = inside_repeat || node.repeated;
        for (const PatternNode& child : node.children)
            check_node(pattern, child, cls, next_inside, ids);
    }

    const PatternNode* find_node(const std::vector<PatternNode>& seq, std::string_view id) const {
        for (const PatternNode& n : seq) {
            if (n.id == id) return &n;
            if (const PatternNode* hit = find_node(n.children, id)) return hit;
        }
        return nullptr;
    }

    void check_pattern(const Pattern& pattern) {
        std::string where = "pattern #" + std::to_string(pattern.index);
        if (pattern.root_sequence.empty()) report(where + " is empty");
        std::vector<std::string> ids;
        for (const PatternNode& node : pattern.root_sequence)
            check_node(pattern, node, nullptr, false, ids);

        for (const Equation& eq : pattern.bindings) {
            if (!def.find_property(eq.virtual_prop))
                report(where + " binds undeclared property '" + eq.virtual_prop + "'");
            const PatternNode* node = find_node(pattern.root_sequence, eq.node_id);
            if (!node) {
                report(where + " binding '" + eq.virtual_prop + " = " + eq.node_id + "." +
                       eq.native_prop + "' references missing node '" + eq.node_id + "'");
            } else if (const WidgetClass* cls = mm.find_class(node->class_name)) {
                if (!cls->find_property(eq.native_prop))
                    report(where + " binding reads undeclared property '" + node->class_name +
                           "." + eq.native_prop + "'");
            }
        }
        for (const PropertyDecl& prop : def.properties) {
            if (prop.is_required() && !pattern.find_binding(prop.name))
                report(where + " does not bind required property '" + prop.name + "'");
        }
    }

    void check() {
        if (def.patterns.empty()) report("declares no patterns");
        for (size_t i = 0; i < def.properties.size(); ++i) {
            const PropertyDecl& prop = def.properties[i];
            if (prop.name == "Pattern")
                report("property name 'Pattern' is reserved for the pattern selector");
            for (size_t j = i + 1; j < def.properties.size(); ++j)
                if (prop.name == def.properties[j].name)
                    report("duplicate property '" + prop.name + "'");
            if (prop.default_expr && prop.default_expr->kind != DefaultExpr::Kind::Literal) {
                const std::string& ref = prop.default_expr->text;
                const PropertyDecl* target = def.find_property(ref);
                if (!target) {
                    report("default of '" + prop.name + "' references unknown property '" + ref +
                           "'");
                } else if (!target->is_required()) {
                    // a defaulted property may only be referenced once resolved
                    auto target_pos = static_cast<size_t>(target - def.properties.data());
                    if (target_pos >= i)
                        report("default of '" + prop.name + "' references '" + ref +
                               "' before it is resolved");
                }
            }
        }
        for (const Pattern& pattern : def.patterns) check_pattern(pattern);
    }
};

} // namespace

std::vector<Diagnostic> validate_defs(const std::vector<VirtualWidgetDef>& defs,
                                      const Metamodel& mm) {
    std::vector<Diagnostic> out;
    for (size_t i = 0; i < defs.size(); ++i) {
        for (size_t j = i + 1; j < defs.size(); ++j)
            if (defs[i].name == defs[j].name)
                out.push_back({"duplicate virtual widget '" + defs[i].name + "'", {}});
        if (mm.find_class(defs[i].name))
            out.push_back(
                {"virtual widget '" + defs[i].name + "' collides with a native class", {}});
        DefChecker{defs[i], mm, out}.check();
    }
    return out;
}

std::string humanize_expression(std::string_view expression) {
    // keep the segment after the last '.'
    size_t dot = expression.rfind('.');
    std::string_view seg =
        dot == std::string_view::npos ? expression : expression.substr(dot + 1);

    std::vector<std::string> words;
    std::string current;
    for (size_t i = 0; i < seg.size(); ++i) {
        char c = seg[i];
        if (c == '_') {
            if (!current.empty()) words.push_back(std::move(current));
            current.clear();
            continue;
        }
        bool boundary = i > 0 && std::islower(static_cast<unsigned char>(seg[i - 1])) &&
                        std::isupper(static_cast<unsigned char>(c));
        if (boundary && !current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (!current.empty()) words.push_back(std::move(current));

    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += words[i];
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string eval_default(const DefaultExpr& expr,
                         const std::map<std::string, std::string>& resolved) {
    switch (expr.kind) {
        case DefaultExpr::Kind::Literal:
            return expr.text;
        case DefaultExpr::Kind::PropRef: {
            auto it = resolved.find(expr.text);
            if (it == resolved.end())
                throw Error("default expression references unresolved property '" + expr.text +
                            "'");
            return it->second;
        }
        case DefaultExpr::Kind::GetLabelFor: {
            auto it = resolved.find(expr.text);
            if (it == resolved.end())
                throw Error("GetLabelFor references unresolved property '" + expr.text + "'");
            return humanize_expression(it->second);
        }
    }
    throw Error("corrupt default expression");
}

} // namespace virtree

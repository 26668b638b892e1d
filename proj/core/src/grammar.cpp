#include "virtree/grammar.hpp"

#include <algorithm>
#include <sstream>

namespace virtree {

GrammarSymbol GrammarSymbol::nt(std::string name) {
    GrammarSymbol s;
    s.kind = Kind::NonTerminal;
    s.nonterminal = std::move(name);
    return s;
}

GrammarSymbol GrammarSymbol::term(GrammarTerminal t) {
    GrammarSymbol s;
    s.kind = Kind::Terminal;
    s.terminal = std::move(t);
    return s;
}

std::string Rule::display_name() const {
    switch (provenance.kind) {
        case RuleProvenance::Kind::Pattern:
            return provenance.def_name + "." + std::to_string(provenance.pattern_index);
        case RuleProvenance::Kind::Native:
            return provenance.class_name;
        case RuleProvenance::Kind::Structural:
            return provenance.label;
    }
    return {};
}

std::vector<std::string> Grammar::nonterminals() const {
    std::vector<std::string> out;
    for (const Rule& r : rules)
        if (std::find(out.begin(), out.end(), r.lhs) == out.end()) out.push_back(r.lhs);
    return out;
}

namespace {

struct GrammarBuilder {
    explicit GrammarBuilder(const VirtualMetamodel& metamodel) : vmm(metamodel) {}

    const VirtualMetamodel& vmm;
    Grammar grammar;
    int next_priority = 0;

    void add_rule(std::string lhs, std::vector<GrammarSymbol> rhs, RuleProvenance prov) {
        Rule rule;
        rule.lhs = std::move(lhs);
        rule.rhs = std::move(rhs);
        rule.provenance = std::move(prov);
        rule.priority = next_priority++;
        grammar.rules.push_back(std::move(rule));
    }

    bool is_leaf_class(const std::string& name) const {
        const WidgetClass* cls = vmm.base.find_class(name);
        return cls && !cls->is_container;
    }

    // Preorder open/leaf/close linearization of one pattern node. A
    // repeated node becomes a reference to a fresh list nonterminal with
    // rules  L ::= group L | epsilon.
    void linearize(const PatternNode& node, std::vector<GrammarSymbol>& out,
                   const RuleProvenance& prov, int& rep_counter) {
        if (node.repeated) {
            std::string list_nt = prov.def_name + "." + std::to_string(prov.pattern_index) +
                                  ".rep" + std::to_string(++rep_counter);
            std::vector<GrammarSymbol> group;
            linearize_plain(node, group, prov, rep_counter);
            group.push_back(GrammarSymbol::nt(list_nt));
            add_rule(list_nt, std::move(group), prov);
            add_rule(list_nt, {}, prov);
            out.push_back(GrammarSymbol::nt(list_nt));
            return;
        }
        linearize_plain(node, out, prov, rep_counter);
    }

    void linearize_plain(const PatternNode& node, std::vector<GrammarSymbol>& out,
                         const RuleProvenance& prov, int& rep_counter) {
        GrammarTerminal head;
        head.class_name = node.class_name;
        head.capture_id = node.id;
        if (!node.match_properties.empty()) {
            if (node.match_properties.size() > 1)
                throw Error(prov.def_name + "." + std::to_string(prov.pattern_index) +
                            ": more than one condition on a '" + node.class_name +
                            "' node is not supported");
            auto it = node.match_properties.begin();
            head.condition = Condition{it->first, it->second};
        }
        if (is_leaf_class(node.class_name)) {
            head.kind = TokKind::Leaf;
            out.push_back(GrammarSymbol::term(std::move(head)));
            return;
        }
        head.kind = TokKind::Open;
        out.push_back(GrammarSymbol::term(std::move(head)));
        for (const PatternNode& child : node.children) linearize(child, out, prov, rep_counter);
        GrammarTerminal tail;
        tail.kind = TokKind::Close;
        tail.class_name = node.class_name;
        out.push_back(GrammarSymbol::term(std::move(tail)));
    }
};

GrammarTerminal plain(TokKind kind, std::string class_name) {
    GrammarTerminal t;
    t.kind = kind;
    t.class_name = std::move(class_name);
    return t;
}

} // namespace

Grammar generate_grammar(const VirtualMetamodel& vmm,
                         const std::vector<VirtualWidgetDef>& defs,
                         std::string root_class) {
    if (root_class.empty()) root_class = vmm.base.root_class();
    const WidgetClass* root = vmm.base.find_class(root_class);
    if (!root) throw Error("unknown root class '" + root_class + "'");
    if (!root->is_container) throw Error("root class '" + root_class + "' is not a container");

    GrammarBuilder b{vmm};
    b.grammar.start = root_class;
    b.grammar.root_class = root_class;

    // pattern rules first, ordered by definition rank then pattern index
    for (const VirtualWidgetDef& def : defs) {
        for (const Pattern& pattern : def.patterns) {
            RuleProvenance prov;
            prov.kind = RuleProvenance::Kind::Pattern;
            prov.def_name = def.name;
            prov.pattern_index = pattern.index;
            std::vector<GrammarSymbol> rhs;
            int rep_counter = 0;
            // list rules are emitted before the pattern rule itself, but
            // share its provenance; reorder so the pattern rule leads.
            size_t mark = b.grammar.rules.size();
            for (const PatternNode& node : pattern.root_sequence)
                b.linearize(node, rhs, prov, rep_counter);
            b.add_rule("VirtualWidget", std::move(rhs), prov);
            std::rotate(b.grammar.rules.begin() + mark,
                        b.grammar.rules.end() - 1, b.grammar.rules.end());
            int p = static_cast<int>(mark);
            for (size_t i = mark; i < b.grammar.rules.size(); ++i)
                b.grammar.rules[i].priority = p++;
        }
    }

    // native fallback rules, in metamodel declaration order
    for (const WidgetClass& cls : vmm.base.classes()) {
        RuleProvenance prov;
        prov.kind = RuleProvenance::Kind::Native;
        prov.class_name = cls.name;
        if (cls.is_container) {
            b.add_rule("NativeWidget",
                       {GrammarSymbol::term(plain(TokKind::Open, cls.name)),
                        GrammarSymbol::nt("WidgetList"),
                        GrammarSymbol::term(plain(TokKind::Close, cls.name))},
                       prov);
        } else {
            b.add_rule("NativeWidget", {GrammarSymbol::term(plain(TokKind::Leaf, cls.name))},
                       prov);
        }
    }

    // structural rules
    auto structural = [](std::string label) {
        RuleProvenance prov;
        prov.kind = RuleProvenance::Kind::Structural;
        prov.label = std::move(label);
        return prov;
    };
    bool has_patterns = std::any_of(b.grammar.rules.begin(), b.grammar.rules.end(),
                                    [](const Rule& r) { return r.is_pattern(); });
    b.add_rule(root_class,
               {GrammarSymbol::term(plain(TokKind::Open, root_class)),
                GrammarSymbol::nt("WidgetList"),
                GrammarSymbol::term(plain(TokKind::Close, root_class))},
               structural("start"));
    if (has_patterns)
        b.add_rule("Widget", {GrammarSymbol::nt("VirtualWidget")}, structural("widget"));
    b.add_rule("Widget", {GrammarSymbol::nt("NativeWidget")}, structural("widget"));
    b.add_rule("WidgetList", {GrammarSymbol::nt("Widget"), GrammarSymbol::nt("WidgetList")},
               structural("widget-list"));
    b.add_rule("WidgetList", {}, structural("widget-list"));

    return b.grammar;
}

std::string to_string(const GrammarTerminal& t) {
    std::string out;
    switch (t.kind) {
        case TokKind::Open: out = "<" + t.class_name + ">"; break;
        case TokKind::Close: out = "</" + t.class_name + ">"; break;
        case TokKind::Leaf: out = "<" + t.class_name + "/>"; break;
    }
    if (t.condition) out += "^{" + t.condition->property + "=\"" + t.condition->value + "\"}";
    if (!t.capture_id.empty()) out += "_{" + t.capture_id + "}";
    return out;
}

std::string dump_grammar(const Grammar& grammar) {
    std::ostringstream out;
    for (const Rule& rule : grammar.rules) {
        out << "[p" << rule.priority << "] " << rule.lhs << " ::=";
        if (rule.rhs.empty()) out << " epsilon";
        for (const GrammarSymbol& sym : rule.rhs) {
            out << ' ';
            if (sym.kind == GrammarSymbol::Kind::Terminal)
                out << to_string(sym.terminal);
            else
                out << sym.nonterminal;
        }
        out << "  (" << rule.display_name() << ")\n";
    }
    return out.str();
}

} // namespace virtree

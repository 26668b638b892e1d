#pragma once

#include <optional>
#include <string>
#include <vector>

#include "virtree/defs.hpp"
#include "virtree/metamodel.hpp"

namespace virtree {

enum class TokKind { Open, Close, Leaf };

struct Condition {
    std::string property;
    std::string value;
    bool operator==(const Condition&) const = default;
};

/// Grammar terminal: a tag token over a widget class, optionally
/// restricted by one property equality and optionally capturing the
/// matched widget under a pattern-node id.
struct GrammarTerminal {
    TokKind kind = TokKind::Leaf;
    std::string class_name;
    std::optional<Condition> condition;
    std::string capture_id;  // empty = no capture
};

struct GrammarSymbol {
    enum class Kind { Terminal, NonTerminal };
    Kind kind = Kind::Terminal;
    GrammarTerminal terminal;  // Kind::Terminal
    std::string nonterminal;   // Kind::NonTerminal

    static GrammarSymbol nt(std::string name);
    static GrammarSymbol term(GrammarTerminal t);
};

struct RuleProvenance {
    enum class Kind { Pattern, Native, Structural };
    Kind kind = Kind::Structural;
    std::string def_name;    // Pattern
    int pattern_index = 0;   // Pattern
    std::string class_name;  // Native
    std::string label;       // Structural
};

struct Rule {
    std::string lhs;
    std::vector<GrammarSymbol> rhs;
    RuleProvenance provenance;
    int priority = 0;  // total order, 0 ranks first

    /// "BooleanInput.3" for pattern rules (desugared list rules share the
    /// owning pattern's name), the class name for native rules, the
    /// structural label otherwise.
    std::string display_name() const;
    bool is_pattern() const { return provenance.kind == RuleProvenance::Kind::Pattern; }
};

struct Grammar {
    std::string start;       // start nonterminal, named after the root class
    std::string root_class;  // class whose open/close tokens bracket the input
    std::vector<Rule> rules; // priority order

    std::vector<std::string> nonterminals() const;
};

/// Builds the parsing grammar: structural rules, one rule per pattern
/// (preorder open/leaf/close linearization, conditions and captures on
/// terminals, star groups desugared into fresh list nonterminals), and a
/// fallback rule per native class. Pattern rules rank above native rules,
/// native above structural. `root_class` defaults to the metamodel root.
Grammar generate_grammar(const VirtualMetamodel& vmm,
                         const std::vector<VirtualWidgetDef>& defs,
                         std::string root_class = {});

/// Deterministic listing, one rule per line: conditions as ^{prop="v"},
/// captures as _{id}, provenance and priority shown.
std::string dump_grammar(const Grammar& grammar);

std::string to_string(const GrammarTerminal& t);

} // namespace virtree

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "virtree/grammar.hpp"
#include "virtree/metamodel.hpp"
#include "virtree/model.hpp"
#include "virtree/virtual_model.hpp"

namespace virtree {

namespace detail {
struct TablesBuilder;
}

/// One element of the linearized model: open/close tokens for container
/// widgets, a single leaf token for leaf widgets.
struct Token {
    TokKind kind = TokKind::Leaf;
    std::string class_name;
    PropertyBag properties;
    std::string widget_id;
    int position = 0;
};

/// Preorder linearization of a model; leaf-ness comes from the metamodel.
std::vector<Token> tokenize(const Model& model, const Metamodel& mm);

/// Shift routing keyed on one property value. An empty property means an
/// unconditional shift through `other_state`. A token whose value is not
/// in the map falls through to `other_state` (-1 = shift not possible).
/// When a value matches, `other_state` remains a viable lower-priority
/// alternative: taking the conditioned branch commits to the conditioned
/// items, and backtracking may later resume through the unconditioned
/// ones.
struct DecisionTable {
    std::string property;
    std::map<std::string, int> value_to_state;
    int other_state = -1;
};

/// Ordered alternatives for one (state, token class): the shift first,
/// then reduces by rule priority. Reduces whose FOLLOW set cannot accept
/// the token are dropped at build time; they can never lead to a parse.
struct ActionEntry {
    std::optional<DecisionTable> shift;
    std::vector<int> reduces;  // rule indices
    bool accept = false;
};

struct ConflictReport {
    int shift_reduce = 0;
    int reduce_reduce = 0;
};

struct ParseStats {
    long input_tokens = 0;
    long shifts = 0;
    long conflicts = 0;  // entries offering more than one alternative
    long backtrack_ops = 0;
    long backtracked_tokens = 0;

    double avg_shifts_per_token() const;
    double conflict_rate() const;     // conflicts / tokens
    double backtrack_rate() const;    // backtrack ops / tokens
    double avg_backtracked_tokens() const;
    void add(const ParseStats& other);
};

/// Renders the nine-line statistics block.
std::string format_stats(const ParseStats& stats);

/// LR(0)-core automaton over token classes with per-state condition
/// splitting and priority-ordered multi-action entries.
class ParserTables {
public:
    int state_count() const { return static_cast<int>(action_index_.size()); }
    const ConflictReport& conflicts() const { return conflicts_; }
    const Grammar& grammar() const { return grammar_; }
    const std::string& root_class() const { return grammar_.root_class; }

    /// Token key for (kind, class); -1 when the class is unknown.
    int token_key(TokKind kind, std::string_view class_name) const;
    int eof_key() const { return eof_key_; }
    int initial_state() const { return 0; }

    const ActionEntry* action(int state, int key) const;
    int goto_state(int state, std::string_view nonterminal) const;

    /// Deterministic listing, one golden-file surface per automaton.
    std::string dump() const;

private:
    friend ParserTables build_tables(const Grammar& grammar);
    friend struct detail::TablesBuilder;

    Grammar grammar_;
    std::vector<std::string> class_names_;
    std::map<std::string, int, std::less<>> class_ids_;
    int eof_key_ = 0;
    std::vector<std::string> nt_names_;
    std::map<std::string, int, std::less<>> nt_ids_;
    std::vector<std::vector<int>> action_index_;  // [state][key] -> entry or -1
    std::vector<ActionEntry> entries_;
    std::vector<std::vector<int>> gotos_;  // [state][nt] -> state or -1
    ConflictReport conflicts_;
};

/// Builds the automaton. Throws when one state would need condition
/// splits over two different properties of the same token class.
ParserTables build_tables(const Grammar& grammar);

struct ParseResult {
    VirtualModel model;
    ParseStats stats;
};

/// Depth-first exploration with backtracking over the prioritized
/// alternatives; returns the first complete parse. Token classes unknown
/// to the tables are a hard error (model/metamodel mismatch).
ParseResult parse(const std::vector<Token>& tokens, const ParserTables& tables,
                  const std::vector<VirtualWidgetDef>& defs);

ParseResult parse_model(const Model& model, const ParserTables& tables,
                        const std::vector<VirtualWidgetDef>& defs, const Metamodel& mm);

/// Parses only the subtree under `widget_id`, whose class must match the
/// root class the tables were built for.
ParseResult parse_subtree(const Model& model, std::string_view widget_id,
                          const ParserTables& tables,
                          const std::vector<VirtualWidgetDef>& defs, const Metamodel& mm);

} // namespace virtree

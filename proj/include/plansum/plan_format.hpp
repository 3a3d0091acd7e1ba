#pragma once

#include <string>
#include <string_view>

#include "plansum/planner.hpp"

namespace plansum {

/// Text form of plans.
///
/// Event plans join components with " - " and tuples with " | "; with
/// `sentence_marker` a tuple from a new source sentence is preceded by " ||| "
/// instead. Entity plans join entities with " | " and sentences with " ||| ".
///
/// Escaping: a run of '-' or '|' inside a component that touches a space or
/// either end of the component is written doubled. On parsing, such a run of
/// even length is halved; odd runs of length 1 ('-' or '|') or 3 ('|') between
/// single spaces are separators; any other odd run touching a space or the
/// string ends is an error. Runs strictly inside a word are copied verbatim.
std::string linearize_plan(const Plan& plan, bool sentence_marker = false);

/// Without sentence markers every tuple gets ordinal 0; with them, ordinals are
/// dense (0, 1, 2, ...) in group order. Throws ParseError naming the character
/// offset of the first malformed position.
Plan parse_plan(std::string_view text);

std::string linearize_entity_plan(const EntityPlan& plan);
EntityPlan parse_entity_plan(std::string_view text);

/// Escapes one component; exposed for tests.
std::string escape_plan_component(std::string_view component);

}  // namespace plansum

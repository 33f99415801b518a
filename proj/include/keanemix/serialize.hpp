#pragma once

#include <json.hpp>

#include "keanemix/induction.hpp"
#include "keanemix/keane.hpp"
#include "keanemix/mixing.hpp"

namespace keanemix {

using nlohmann::json;

json to_json(const Rational& r);                 // "p/q"
json to_json(const IntervalSet& s);              // [["a","b"], ...]
json to_json(const Interval& v);
json to_json(const Iet& T);
json to_json(const Permutation& p);
json to_json(const LandingMatrix& A);
json to_json(const StageParams& p);
json to_json(const ReturnTable& t);
json to_json(const ConditionReport& r);
json to_json(const InducedMap& ind);
json to_json(const MixingWindowResult& w);
json to_json(const Lemma2Report& r);
json to_json(const Lemma3Report& r);
json to_json(const Theorem1Report& r);
json to_json(const ObstructionResult& r);

StageParams stage_params_from_json(const json& j);
IntervalSet interval_set_from_json(const json& j);

// CSV with columns n,hit,piece_count (piece_count -1 when untracked)
std::string window_csv(const MixingWindowResult& w);

} // namespace keanemix

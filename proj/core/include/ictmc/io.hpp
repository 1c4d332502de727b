#pragma once

#include "ictmc/model.hpp"
#include "ictmc/solver.hpp"

#include <string>

namespace ictmc {

struct ParseError : Error {
  using Error::Error;
};

// Problem files are JSON documents in one of two shapes:
//   { "states": m, "gambles": N x m, "lower_bounds": N x m with null = none }
//   { "states": m, "q_lower": m x m, "q_upper": m x m }
// plus optional "name" and "description".  Loading converts the interval
// form to the gamble form, appends missing indicator gambles, and validates.
Problem load_problem(const std::string& path);
Problem parse_problem(const std::string& text);

// Serialization uses 17 significant digits so every double round-trips
// bit-exactly through the decimal form.
std::string format_double(double x);
std::string serialize_problem(const Problem& p);

std::string serialize_report(const SolveReport& r, const std::string& status);
std::string serialize_report(const GridReport& r, const std::string& status);
std::string serialize_bounds(const TransitionBounds& b, const std::string& status);

}  // namespace ictmc

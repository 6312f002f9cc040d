#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "octic/group.hpp"

namespace octic {

enum class CheckScope { Group, Layers, Model, Invariants, All };

std::optional<CheckScope> parse_scope(std::string_view name);

/// One verified property. Properties indexed by group element fill all
/// eight columns; the others report a single value in column e.
struct CheckRow {
  std::string suite;
  std::string name;
  std::array<double, kGroupOrder> residual{};
  bool per_element = true;
  double tolerance = 0.0;

  double worst() const;
  bool passed() const { return worst() < tolerance; }
};

struct CheckOptions {
  std::uint64_t seed = 0;
  int samples = 3;  ///< random inputs per property; the worst is kept
};

std::vector<CheckRow> run_checks(CheckScope scope, const CheckOptions& opt = {});

/// Fixed-width table, one row per property, columns e .. sr3, worst,
/// tolerance, status.
void print_check_report(std::ostream& out, const std::vector<CheckRow>& rows);

bool all_passed(const std::vector<CheckRow>& rows);

}  // namespace octic

#include "octic/fault.hpp"

#include <atomic>

namespace octic {

namespace {
std::atomic<Fault> g_fault{Fault::None};
}

void set_fault(Fault f) { g_fault.store(f); }
Fault active_fault() { return g_fault.load(std::memory_order_relaxed); }

std::optional<Fault> parse_fault(std::string_view name) {
  if (name == "none") return Fault::None;
  if (name == "rho-e-sign") return Fault::RhoESign;
  if (name == "unshared-e") return Fault::UnsharedE;
  return std::nullopt;
}

}  // namespace octic

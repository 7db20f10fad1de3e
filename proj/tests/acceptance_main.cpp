// Acceptance suite runner: one pass/fail line per criterion, nonzero exit on
// any failure. Also executed through `cmcfol verify`.
#include <cstdio>

#include "cmcfol/acceptance.hpp"

int main() {
  cmcfol::AcceptanceReport rep = cmcfol::run_acceptance(true);
  std::fputs(rep.to_text().c_str(), stdout);
  return rep.all_pass() ? 0 : 1;
}

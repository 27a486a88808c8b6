#include "permlab/matrix.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "permlab/embedded_data.hpp"
#include "permlab/errors.hpp"

namespace permlab {

DefaultState resolve_state(DefaultState raw, QueryContext context) {
  if (raw != DefaultState::kGrantedWhenInstalled) return raw;
  return context == QueryContext::kInstalledPwa ? DefaultState::kGranted : DefaultState::kDenied;
}

std::string_view state_code(DefaultState state) {
  switch (state) {
    case DefaultState::kGranted:
      return "g";
    case DefaultState::kPrompted:
      return "p";
    case DefaultState::kDenied:
      return "d";
    case DefaultState::kUnsupported:
      return "-";
    case DefaultState::kGrantedWhenInstalled:
      return "g*";
  }
  return "-";
}

DefaultState state_from_code(std::string_view code) {
  if (code == "g") return DefaultState::kGranted;
  if (code == "p") return DefaultState::kPrompted;
  if (code == "d") return DefaultState::kDenied;
  if (code == "-") return DefaultState::kUnsupported;
  if (code == "g*") return DefaultState::kGrantedWhenInstalled;
  throw ParseError("invalid state code '" + std::string(code) +
                   "' (expected one of g, p, d, -, g*)");
}

std::string_view platform_token(Platform platform) {
  switch (platform) {
    case Platform::kIos:
      return "ios";
    case Platform::kAndroid:
      return "android";
    case Platform::kDesktop:
      return "desktop";
  }
  return "desktop";
}

Platform platform_from_token(std::string_view token) {
  if (token == "ios") return Platform::kIos;
  if (token == "android") return Platform::kAndroid;
  if (token == "desktop") return Platform::kDesktop;
  throw ParseError("unknown platform token: '" + std::string(token) + "'");
}

std::string_view context_token(QueryContext context) {
  return context == QueryContext::kInstalledPwa ? "installed" : "tab";
}

QueryContext context_from_token(std::string_view token) {
  if (token == "installed") return QueryContext::kInstalledPwa;
  if (token == "tab") return QueryContext::kBrowserTab;
  throw ParseError("unknown context token: '" + std::string(token) +
                   "' (expected \"installed\" or \"tab\")");
}

PermissionMatrix PermissionMatrix::from_json(const nlohmann::json& doc, const Registry& registry) {
  if (!doc.is_object() || !doc.contains("targets") || !doc.at("targets").is_array()) {
    throw ParseError("matrix document needs a top-level 'targets' array");
  }
  if (!doc.contains("cells") || !doc.at("cells").is_object()) {
    throw ParseError("matrix document needs a top-level 'cells' object");
  }

  PermissionMatrix matrix;
  for (const auto& item : doc.at("targets")) {
    if (!item.is_object()) throw ParseError("matrix target entries must be objects");
    BrowserTarget target;
    if (!item.contains("id") || !item.at("id").is_string()) {
      throw ParseError("matrix target missing string 'id'");
    }
    target.id = item.at("id").get<std::string>();
    const std::string where = "target '" + target.id + "'";
    if (!item.contains("platform") || !item.at("platform").is_string()) {
      throw ParseError(where + ": missing string 'platform'");
    }
    target.platform = platform_from_token(item.at("platform").get<std::string>());
    if (!item.contains("browser_label") || !item.at("browser_label").is_string()) {
      throw ParseError(where + ": missing string 'browser_label'");
    }
    target.browser_label = item.at("browser_label").get<std::string>();
    if (!item.contains("pwa_install_supported") || !item.at("pwa_install_supported").is_boolean()) {
      throw ParseError(where + ": missing boolean 'pwa_install_supported'");
    }
    target.pwa_install_supported = item.at("pwa_install_supported").get<bool>();

    if (!matrix.target_index_.emplace(target.id, matrix.targets_.size()).second) {
      throw ParseError("duplicate target id: '" + target.id + "'");
    }
    matrix.targets_.push_back(std::move(target));
  }
  if (matrix.targets_.empty()) throw ParseError("matrix needs at least one target");

  const auto& cells = doc.at("cells");
  // Cell keys must be canonical registry names: an alias here would shadow
  // its canonical row and break the one-cell-per-descriptor contract.
  for (const auto& [name, row] : cells.items()) {
    const PermissionDescriptor* d = registry.find(name);
    if (!d || d->name != name) {
      throw ParseError("matrix cell for unknown descriptor: '" + name + "'");
    }
    if (!row.is_object()) throw ParseError("matrix row '" + name + "' must be an object");
    for (const auto& [target_id, code] : row.items()) {
      if (!matrix.target_index_.count(target_id)) {
        throw ParseError("matrix row '" + name + "' has cell for unknown target: '" + target_id +
                         "'");
      }
      if (!code.is_string()) {
        throw ParseError("matrix cell (" + name + ", " + target_id + ") must be a string code");
      }
    }
  }

  // Total population, registry order.
  matrix.cells_.reserve(registry.descriptors().size() * matrix.targets_.size());
  for (const auto& d : registry.descriptors()) {
    auto row_it = cells.find(d.name);
    if (row_it == cells.end()) {
      throw ParseError("matrix is missing the row for descriptor '" + d.name + "'");
    }
    matrix.descriptor_index_.emplace(d.name, matrix.descriptor_names_.size());
    matrix.descriptor_names_.push_back(d.name);
    for (const auto& target : matrix.targets_) {
      auto cell_it = row_it->find(target.id);
      if (cell_it == row_it->end()) {
        throw ParseError("matrix is missing the cell (" + d.name + ", " + target.id + ")");
      }
      try {
        matrix.cells_.push_back(state_from_code(cell_it->get<std::string>()));
      } catch (const ParseError& e) {
        throw ParseError("matrix cell (" + d.name + ", " + target.id + "): " + e.what());
      }
    }
  }
  return matrix;
}

PermissionMatrix PermissionMatrix::from_text(std::string_view json_text, const Registry& registry) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("matrix document is not valid JSON");
  return from_json(doc, registry);
}

PermissionMatrix PermissionMatrix::load_file(const std::string& path, const Registry& registry) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str(), registry);
}

const PermissionMatrix& PermissionMatrix::embedded() {
  static const PermissionMatrix instance =
      from_text(embedded::matrix_json(), Registry::embedded());
  return instance;
}

const BrowserTarget* PermissionMatrix::find_target(std::string_view id) const {
  auto it = target_index_.find(id);
  if (it == target_index_.end()) return nullptr;
  return &targets_[it->second];
}

const BrowserTarget& PermissionMatrix::target_at(std::string_view id) const {
  const BrowserTarget* t = find_target(id);
  if (!t) throw UnknownNameError("unknown browser target: '" + std::string(id) + "'");
  return *t;
}

DefaultState PermissionMatrix::raw_state(std::string_view descriptor,
                                         std::string_view target) const {
  auto d = descriptor_index_.find(descriptor);
  if (d == descriptor_index_.end()) {
    throw UnknownNameError("unknown permission descriptor: '" + std::string(descriptor) + "'");
  }
  auto t = target_index_.find(target);
  if (t == target_index_.end()) {
    throw UnknownNameError("unknown browser target: '" + std::string(target) + "'");
  }
  return cells_[d->second * targets_.size() + t->second];
}

DefaultState PermissionMatrix::default_state(std::string_view descriptor, std::string_view target,
                                             QueryContext context) const {
  return resolve_state(raw_state(descriptor, target), context);
}

std::vector<CellDiff> PermissionMatrix::diff_targets(std::string_view left,
                                                     std::string_view right) const {
  target_at(left);
  target_at(right);
  std::vector<CellDiff> diffs;
  for (const auto& name : descriptor_names_) {
    DefaultState a = raw_state(name, left);
    DefaultState b = raw_state(name, right);
    if (a != b) diffs.push_back({name, a, b});
  }
  std::sort(diffs.begin(), diffs.end(),
            [](const CellDiff& a, const CellDiff& b) { return a.descriptor < b.descriptor; });
  return diffs;
}

nlohmann::json PermissionMatrix::to_json() const {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : targets_) {
    targets.push_back({
        {"id", t.id},
        {"platform", platform_token(t.platform)},
        {"browser_label", t.browser_label},
        {"pwa_install_supported", t.pwa_install_supported},
    });
  }
  nlohmann::json cells = nlohmann::json::object();
  for (std::size_t d = 0; d < descriptor_names_.size(); ++d) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      row[targets_[t].id] = state_code(cells_[d * targets_.size() + t]);
    }
    cells[descriptor_names_[d]] = std::move(row);
  }
  return nlohmann::json{{"targets", std::move(targets)}, {"cells", std::move(cells)}};
}

}  // namespace permlab

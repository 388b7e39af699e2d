#include "pivotmodel/service.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "httplib.h"
#include "pivotmodel/csv.hpp"
#include "pivotmodel/data_io.hpp"
#include "pivotmodel/error.hpp"
#include "pivotmodel/json_codec.hpp"
#include "pivotmodel/lint.hpp"
#include "pivotmodel/model_file.hpp"
#include "pivotmodel/trace.hpp"
#include "pivotmodel/view.hpp"

namespace pivotmodel {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFile = "model.json";
constexpr const char* kDataFile = "data.csv";
constexpr const char* kOverridesFile = "overrides.csv";
constexpr const char* kRestoredSource = "restored";

int status_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::bind:
    case ErrorCode::validation:
    case ErrorCode::data: return 422;
    case ErrorCode::io: return 500;
  }
  return 500;
}

ApiResponse json_response(const Json& j, int status = 200) { return {status, j.dump(), "application/json"}; }

ApiResponse error_response(int status, std::string_view code, const std::string& message,
                           const std::string& detail = {}) {
  Json j;
  j["code"] = code;
  j["message"] = message;
  j["detail"] = detail;
  return json_response(j, status);
}

Json parse_body(std::string_view body, bool allow_empty) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    if (allow_empty) return Json::object();
    throw Error(ErrorCode::parse, "request body is empty");
  }
  Json j = Json::parse(body);
  if (!j.is_object()) throw Error(ErrorCode::parse, "request body must be a JSON object");
  return j;
}

std::optional<std::uint64_t> requested_version(const Json& body, const QueryParams& query) {
  if (body.contains("model_version")) {
    const auto& v = body["model_version"];
    if (!v.is_number_unsigned()) throw Error(ErrorCode::parse, "model_version must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  if (auto it = query.find("model_version"); it != query.end()) {
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse, "model_version must be a non-negative integer", it->second);
    }
  }
  return std::nullopt;
}

void check_version(std::uint64_t current, std::optional<std::uint64_t> requested) {
  if (requested && *requested != current) {
    throw Error(ErrorCode::conflict, "model has changed since the request was prepared",
                "current model_version " + std::to_string(current) + ", request based on " +
                    std::to_string(*requested));
  }
}

std::string query_value(const QueryParams& query, const std::string& key, std::string fallback) {
  auto it = query.find(key);
  return it == query.end() || it->second.empty() ? fallback : it->second;
}

bool valid_model_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_';
  });
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    if (next > pos) parts.emplace_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

ExportLayer parse_layer(const std::string& name) {
  if (name == "data") return ExportLayer::data;
  if (name == "calculated") return ExportLayer::calculated;
  if (name == "overrides") return ExportLayer::overrides;
  if (name == "all") return ExportLayer::all;
  throw Error(ErrorCode::validation, "unknown layer '" + name + "'", "expected data, calculated, overrides or all");
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {}

Service::~Service() = default;

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = models_.find(id);
  if (it == models_.end()) throw Error(ErrorCode::not_found, "unknown model '" + id + "'");
  return it->second;
}

std::string Service::add_model(std::string id, std::unique_ptr<Model> model) {
  auto entry = std::make_shared<Entry>();
  entry->model = std::move(model);
  std::lock_guard lock(registry_mutex_);
  if (id.empty()) {
    do {
      id = "m" + std::to_string(next_id_++);
    } while (models_.count(id));
  } else if (models_.count(id)) {
    throw Error(ErrorCode::conflict, "model '" + id + "' already exists");
  }
  models_.emplace(id, entry);
  return id;
}

void Service::persist(const std::string& id, const Entry& entry, bool structure_changed) const {
  if (config_.model_dir.empty()) return;
  fs::path dir = fs::path(config_.model_dir) / id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create model directory", dir.string() + ": " + ec.message());
  const auto& m = *entry.model;
  if (structure_changed) save_model((dir / kModelFile).string(), *m.structure, m.rules);
  write_text_file((dir / kDataFile).string(), export_long_csv(m.cube, {}, ExportLayer::data));
  write_text_file((dir / kOverridesFile).string(), export_long_csv(m.cube, {}, ExportLayer::overrides));
}

std::size_t Service::load_persisted() {
  if (config_.model_dir.empty() || !fs::is_directory(config_.model_dir)) return 0;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(config_.model_dir)) {
    if (e.is_directory() && fs::exists(e.path() / kModelFile)) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::size_t loaded = 0;
  for (const auto& dir : dirs) {
    auto id = dir.filename().string();
    try {
      auto model = std::make_unique<Model>(load_model((dir / kModelFile).string()));
      for (auto [file, target] : {std::pair{kDataFile, LoadTarget::data}, std::pair{kOverridesFile, LoadTarget::pins}}) {
        auto path = dir / file;
        if (!fs::exists(path)) continue;
        auto report = load_long_csv(model->cube, model->rules, read_text_file(path.string()), kRestoredSource, target);
        for (const auto& issue : report.rejected) {
          std::cerr << path.string() << ":" << issue.line << ": " << issue.reason << "\n";
        }
      }
      apply_rules(model->cube, model->rules);
      add_model(id, std::move(model));
      ++loaded;
    } catch (const std::exception& e) {
      std::cerr << "skipping persisted model '" << id << "': " << e.what() << "\n";
    }
  }
  return loaded;
}

ApiResponse Service::handle(std::string_view method, std::string_view path, const QueryParams& query,
                            std::string_view body) {
  try {
    return route(method, split_path(path), query, body);
  } catch (const Error& e) {
    return error_response(status_of(e.code()), to_string(e.code()), e.what(), e.detail());
  } catch (const Json::parse_error& e) {
    return error_response(400, "parse", "malformed JSON body", e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "parse", "unexpected JSON shape", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

ApiResponse Service::route(std::string_view method, const std::vector<std::string>& parts, const QueryParams& query,
                           std::string_view body) {
  auto method_not_allowed = [&] {
    return error_response(405, "method_not_allowed", std::string(method) + " is not supported here");
  };
  if (parts.empty() || parts[0] != "models" || parts.size() > 3) {
    return error_response(404, "not_found", "no such endpoint");
  }

  if (parts.size() == 1) {
    if (method == "GET") {
      Json list = Json::array();
      std::lock_guard lock(registry_mutex_);
      for (const auto& [id, entry] : models_) list.push_back(id);
      return json_response({{"models", list}});
    }
    if (method != "POST") return method_not_allowed();
    auto id = query_value(query, "id", "");
    if (!id.empty() && !valid_model_id(id)) {
      throw Error(ErrorCode::validation, "model id may contain only letters, digits, '-' and '_'", id);
    }
    auto model = std::make_unique<Model>(build_model(parse_model_document(body)));
    id = add_model(id, std::move(model));
    auto entry = find(id);
    std::shared_lock lock(entry->mutex);
    persist(id, *entry, true);
    return json_response({{"id", id}, {"model_version", entry->version}}, 201);
  }

  const std::string& id = parts[1];
  auto entry = find(id);

  if (parts.size() == 2) {
    if (method == "DELETE") {
      std::unique_lock model_lock(entry->mutex);
      std::lock_guard lock(registry_mutex_);
      models_.erase(id);
      if (!config_.model_dir.empty()) {
        std::error_code ec;
        fs::remove_all(fs::path(config_.model_dir) / id, ec);
      }
      return json_response({{"id", id}, {"deleted", true}});
    }
    if (method != "GET") return method_not_allowed();
    std::shared_lock lock(entry->mutex);
    const auto& m = *entry->model;
    return json_response({{"id", id},
                          {"name", m.structure->name()},
                          {"model_version", entry->version},
                          {"stats", to_json(stats(*m.structure, m.rules), m.rules.size())}});
  }

  const std::string& action = parts[2];
  auto& m = *entry->model;

  if (action == "structure") {
    if (method != "GET") return method_not_allowed();
    std::shared_lock lock(entry->mutex);
    auto j = structure_to_json(*m.structure);
    j["model_version"] = entry->version;
    return json_response(j);
  }

  if (action == "stats") {
    if (method != "GET") return method_not_allowed();
    std::shared_lock lock(entry->mutex);
    auto j = to_json(stats(*m.structure, m.rules), m.rules.size());
    j["model_version"] = entry->version;
    return json_response(j);
  }

  if (action == "data") {
    if (method == "GET") {
      std::shared_lock lock(entry->mutex);
      auto layer = parse_layer(query_value(query, "layer", "data"));
      return {200, export_long_csv(m.cube, {}, layer), "text/csv"};
    }
    if (method != "POST") return method_not_allowed();
    auto format = query_value(query, "format", "auto");
    auto source = query_value(query, "source", "upload");
    std::optional<std::string> spread;
    if (auto it = query.find("spread"); it != query.end() && !it->second.empty()) spread = it->second;
    if (format == "auto") format = detect_format(body) == DataFormat::long_format ? "long" : "wide";
    if (format != "long" && format != "wide") {
      throw Error(ErrorCode::validation, "unknown data format '" + format + "'", "expected long or wide");
    }
    std::unique_lock lock(entry->mutex);
    check_version(entry->version, requested_version(Json::object(), query));
    auto report = format == "long" ? load_long_csv(m.cube, m.rules, body, source)
                                   : load_wide_csv(m.cube, m.rules, body, source, spread);
    ++entry->version;
    persist(id, *entry, false);
    auto j = to_json(report);
    j["model_version"] = entry->version;
    return json_response(j);
  }

  if (action == "calc") {
    if (method != "POST") return method_not_allowed();
    auto req = parse_body(body, true);
    std::unique_lock lock(entry->mutex);
    check_version(entry->version, requested_version(req, query));
    auto report = apply_rules(m.cube, m.rules);
    ++entry->version;
    return json_response({{"model_version", entry->version}, {"calc", to_json(report)}});
  }

  if (action == "view") {
    if (method != "POST") return method_not_allowed();
    auto spec = view_spec_from_json(parse_body(body, false));
    std::shared_lock lock(entry->mutex);
    return json_response(to_json(materialize_view(m.cube, m.rules, spec, entry->version)));
  }

  if (action == "cells") {
    if (method != "PUT") return method_not_allowed();
    auto req = parse_body(body, false);
    auto source = req.contains("source") ? req["source"].get<std::string>() : std::string("user");
    if (!req.contains("cells") || !req["cells"].is_array()) throw Error(ErrorCode::parse, "cells must be an array");

    std::unique_lock lock(entry->mutex);
    check_version(entry->version, requested_version(req, query));
    const auto& s = *m.structure;
    auto leaves = m.rules.leaf_mask(s);

    // Resolve and validate everything before touching the cube.
    enum class Mode { data, override_pin, clear };
    struct Planned {
      CellAddress address;
      double value = 0.0;
      Mode mode = Mode::data;
    };
    std::vector<Planned> plan;
    for (const auto& c : req["cells"]) {
      if (!c.is_object() || !c.contains("address")) throw Error(ErrorCode::parse, "each cell needs an address");
      Planned p;
      p.address = s.resolve(named_address_from_json(c["address"]));
      auto mode = c.contains("mode") ? c["mode"].get<std::string>() : std::string("data");
      if (mode == "data") {
        p.mode = Mode::data;
      } else if (mode == "override") {
        p.mode = Mode::override_pin;
      } else if (mode == "clear") {
        p.mode = Mode::clear;
      } else {
        throw Error(ErrorCode::validation, "unknown cell mode '" + mode + "'", "expected data, override or clear");
      }
      if (p.mode != Mode::clear) {
        if (!c.contains("value") || !c["value"].is_number()) {
          throw Error(ErrorCode::validation, "cell value must be a number", s.describe(p.address));
        }
        p.value = c["value"].get<double>();
        if (!std::isfinite(p.value)) {
          throw Error(ErrorCode::validation, "cell value must be finite", s.describe(p.address));
        }
      }
      if (p.mode == Mode::data && !is_input_eligible(leaves, p.address)) {
        throw Error(ErrorCode::validation, "cell is computed by a rule; send mode \"override\" to pin it",
                    s.describe(p.address));
      }
      plan.push_back(std::move(p));
    }

    std::vector<CellWrite> writes;
    std::size_t pinned = 0;
    std::size_t cleared = 0;
    for (const auto& p : plan) {
      switch (p.mode) {
        case Mode::data: writes.push_back({p.address, p.value}); break;
        case Mode::override_pin:
          override_cell(m.cube, m.rules, {p.address, p.value, source});
          ++pinned;
          break;
        case Mode::clear:
          if (clear_override(m.cube, p.address)) ++cleared;
          break;
      }
    }
    auto report = writes.empty() ? apply_rules(m.cube, m.rules) : write_back(m.cube, m.rules, writes, source);
    ++entry->version;
    persist(id, *entry, false);
    return json_response({{"model_version", entry->version},
                          {"written", writes.size()},
                          {"pinned", pinned},
                          {"cleared", cleared},
                          {"calc", to_json(report)}});
  }

  if (action == "rules") {
    if (method == "GET") {
      std::shared_lock lock(entry->mutex);
      return json_response({{"model_version", entry->version}, {"rules", rules_to_json(m.rules)}});
    }
    if (method != "PATCH") return method_not_allowed();
    auto req = parse_body(body, false);
    std::unique_lock lock(entry->mutex);
    check_version(entry->version, requested_version(req, query));

    RuleSet next = m.rules;
    if (req.contains("order")) {
      const auto& order = req["order"];
      if (!order.is_array()) throw Error(ErrorCode::parse, "order must be an array of rule names");
      if (order.size() != next.size()) {
        throw Error(ErrorCode::validation, "order must list every rule exactly once",
                    std::to_string(order.size()) + " names for " + std::to_string(next.size()) + " rules");
      }
      std::vector<std::size_t> permutation;
      std::vector<bool> seen(next.size(), false);
      for (const auto& name : order) {
        auto index = next.index_of(name.get<std::string>());
        if (seen[index]) throw Error(ErrorCode::validation, "rule listed twice in order", name.get<std::string>());
        seen[index] = true;
        permutation.push_back(index);
      }
      next = next.reordered(permutation);
    }
    if (req.contains("enabled")) {
      const auto& enabled = req["enabled"];
      if (!enabled.is_object()) throw Error(ErrorCode::parse, "enabled must be an object of rule name: bool");
      for (const auto& [name, flag] : enabled.items()) {
        if (!flag.is_boolean()) throw Error(ErrorCode::parse, "enabled flag for '" + name + "' must be a boolean");
        next = next.with_enabled(next.index_of(name), flag.get<bool>());
      }
    }
    m.rules = std::move(next);
    auto report = apply_rules(m.cube, m.rules);
    ++entry->version;
    persist(id, *entry, true);
    return json_response(
        {{"model_version", entry->version}, {"rules", rules_to_json(m.rules)}, {"calc", to_json(report)}});
  }

  if (action == "trace") {
    if (method != "POST") return method_not_allowed();
    auto req = parse_body(body, false);
    if (!req.contains("address")) throw Error(ErrorCode::parse, "trace needs an address");
    std::shared_lock lock(entry->mutex);
    auto address = m.structure->resolve(named_address_from_json(req["address"]));
    std::optional<std::size_t> rule;
    if (req.contains("rule") && !req["rule"].is_null()) rule = m.rules.index_of(req["rule"].get<std::string>());
    auto j = to_json(m.cube, m.rules, trace(m.cube, m.rules, address, rule));
    j["model_version"] = entry->version;
    return json_response(j);
  }

  if (action == "docs") {
    if (method != "GET") return method_not_allowed();
    std::shared_lock lock(entry->mutex);
    auto format = query_value(query, "format", "csv");
    if (format == "csv") return {200, export_docs_csv(*m.structure, m.rules), "text/csv"};
    if (format == "text") return {200, render_docs_text(*m.structure, m.rules), "text/plain"};
    throw Error(ErrorCode::validation, "unknown docs format '" + format + "'", "expected csv or text");
  }

  if (action == "audit") {
    if (method != "GET") return method_not_allowed();
    std::shared_lock lock(entry->mutex);
    auto reports = model_audit(m.cube, m.rules);
    Json cells = Json::array();
    for (const auto& r : reports) cells.push_back(to_json(m.cube, m.rules, r));
    return json_response({{"model_version", entry->version},
                          {"count", reports.size()},
                          {"lint", lint_to_json(*m.structure, coverage_lint(*m.structure, m.rules))},
                          {"cells", std::move(cells)}});
  }

  return error_response(404, "not_found", "no such endpoint");
}

void Service::install(httplib::Server& server) {
  server.set_payload_max_length(config_.max_body_bytes);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams query;
    for (const auto& [k, v] : req.params) query[k] = v;
    auto out = handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Patch(".*", handler);
  server.Delete(".*", handler);
}

bool Service::serve() {
  install(*server_);
  return server_->listen(config_.host, config_.port);
}

void Service::stop() { server_->stop(); }

}  // namespace pivotmodel

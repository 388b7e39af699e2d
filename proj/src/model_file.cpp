#include "pivotmodel/model_file.hpp"

#include "json.hpp"
#include "pivotmodel/csv.hpp"
#include "pivotmodel/error.hpp"

namespace pivotmodel {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::parse, "model file: " + where + ": " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing \"") + key + "\"");
  return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) schema_error(where, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::string optional_string(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) schema_error(where, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) schema_error(where, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

ModelDocument parse_model_document(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) schema_error("document", "expected an object");
  const auto& version = require(root, "format_version", "document");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    schema_error("document", "unsupported format_version (expected 1)");
  }

  ModelDocument doc;
  doc.structure.name = require_string(root, "name", "document");
  const auto& dims = require(root, "dimensions", "document");
  if (!dims.is_array()) schema_error("dimensions", "expected an array");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    auto where = "dimensions[" + std::to_string(i) + "]";
    DimensionSpec dim;
    dim.name = require_string(dims[i], "name", where);
    const auto& members = require(dims[i], "members", where);
    if (!members.is_array()) schema_error(where, "\"members\" must be an array");
    for (std::size_t j = 0; j < members.size(); ++j) {
      auto mwhere = where + ".members[" + std::to_string(j) + "]";
      MemberSpec m;
      m.name = require_string(members[j], "name", mwhere);
      if (auto it = members[j].find("aliases"); it != members[j].end()) m.aliases = string_list(*it, mwhere + ".aliases");
      m.parent = optional_string(members[j], "parent", mwhere);
      m.format = optional_string(members[j], "format", mwhere);
      dim.members.push_back(std::move(m));
    }
    doc.structure.dimensions.push_back(std::move(dim));
  }

  if (auto it = root.find("rules"); it != root.end()) {
    if (!it->is_array()) schema_error("rules", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& r = (*it)[i];
      auto where = "rules[" + std::to_string(i) + "]";
      RuleSpec rule;
      rule.name = require_string(r, "name", where);
      rule.dimension = require_string(r, "dimension", where);
      rule.target = require_string(r, "target", where);
      rule.formula = require_string(r, "formula", where);
      if (auto e = r.find("enabled"); e != r.end()) {
        if (!e->is_boolean()) schema_error(where, "\"enabled\" must be a boolean");
        rule.enabled = e->get<bool>();
      }
      if (auto f = r.find("filters"); f != r.end()) {
        if (!f->is_object()) schema_error(where, "\"filters\" must be an object");
        for (const auto& [dim, members] : f->items()) {
          rule.filters.emplace_back(dim, string_list(members, where + ".filters." + dim));
        }
      }
      if (auto f = r.find("folder"); f != r.end()) rule.folder = string_list(*f, where + ".folder");
      doc.rules.push_back(std::move(rule));
    }
  }
  return doc;
}

std::string format_model_document(const ModelDocument& doc) {
  Json root;
  root["format_version"] = kFormatVersion;
  root["name"] = doc.structure.name;
  Json dims = Json::array();
  for (const auto& d : doc.structure.dimensions) {
    Json dim;
    dim["name"] = d.name;
    Json members = Json::array();
    for (const auto& m : d.members) {
      Json member;
      member["name"] = m.name;
      if (!m.aliases.empty()) member["aliases"] = m.aliases;
      if (!m.parent.empty()) member["parent"] = m.parent;
      if (!m.format.empty()) member["format"] = m.format;
      members.push_back(std::move(member));
    }
    dim["members"] = std::move(members);
    dims.push_back(std::move(dim));
  }
  root["dimensions"] = std::move(dims);
  Json rules = Json::array();
  for (const auto& r : doc.rules) {
    Json rule;
    rule["name"] = r.name;
    rule["dimension"] = r.dimension;
    rule["target"] = r.target;
    rule["formula"] = r.formula;
    rule["enabled"] = r.enabled;
    if (!r.filters.empty()) {
      Json filters = Json::object();
      for (const auto& [dim, members] : r.filters) filters[dim] = members;
      rule["filters"] = std::move(filters);
    }
    if (!r.folder.empty()) rule["folder"] = r.folder;
    rules.push_back(std::move(rule));
  }
  root["rules"] = std::move(rules);
  return root.dump(2) + "\n";
}

ModelDocument document_of(const ModelStructure& structure, const RuleSet& rules) {
  return {structure.to_spec(), rules.specs()};
}

Model build_model(const ModelDocument& doc) {
  auto structure = std::make_shared<const ModelStructure>(ModelStructure::build(doc.structure));
  auto rules = RuleSet::bind(doc.rules, *structure);
  return Model(std::move(structure), std::move(rules));
}

Model load_model(const std::string& path) {
  try {
    return build_model(parse_model_document(read_text_file(path)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path + ": " + e.what(), e.detail());
  }
}

void save_model(const std::string& path, const ModelStructure& structure, const RuleSet& rules) {
  write_text_file(path, format_model_document(document_of(structure, rules)));
}

}  // namespace pivotmodel

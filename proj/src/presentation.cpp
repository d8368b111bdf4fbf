#include "soficlab/presentation.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "soficlab/errors.hpp"

namespace soficlab {

namespace {

using Json = nlohmann::ordered_json;

int to_point(const Json& j, const char* where) {
  if (!j.is_number_integer())
    throw ParseError(std::string(where) + ": expected an integer point index");
  return j.get<int>();
}

}  // namespace

Presentation parse_presentation(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("presentation is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("presentation must be a JSON object");
  if (!doc.contains("weights") || !doc["weights"].is_array())
    throw ParseError("presentation needs a \"weights\" array");
  if (!doc.contains("classes") || !doc["classes"].is_array())
    throw ParseError("presentation needs a \"classes\" array");

  std::vector<Rational> weights;
  for (const auto& w : doc["weights"]) {
    if (!w.is_string())
      throw ParseError("weights must be \"num/den\" strings");
    weights.push_back(parse_rational(w.get<std::string>()));
  }
  std::vector<std::vector<int>> classes;
  for (const auto& cls : doc["classes"]) {
    if (!cls.is_array()) throw ParseError("each class must be an array of points");
    std::vector<int> points;
    for (const auto& p : cls) points.push_back(to_point(p, "classes"));
    classes.push_back(std::move(points));
  }
  FinRelation relation = build_relation(std::move(weights), std::move(classes));

  std::map<std::string, PartialBijection> gens;
  if (doc.contains("generators")) {
    if (!doc["generators"].is_object())
      throw ParseError("\"generators\" must map names to point maps");
    for (const auto& [name, mapping] : doc["generators"].items()) {
      if (!mapping.is_object())
        throw ParseError("generator '" + name + "' must be a point map");
      std::vector<std::pair<int, int>> pairs;
      for (const auto& [from, to] : mapping.items()) {
        int x = 0;
        try {
          std::size_t used = 0;
          x = std::stoi(from, &used);
          if (used != from.size()) throw std::invalid_argument(from);
        } catch (const std::exception&) {
          throw ParseError("generator '" + name + "': bad point index key '" +
                           from + "'");
        }
        pairs.emplace_back(x, to_point(to, ("generator '" + name + "'").c_str()));
      }
      gens.emplace(name, PartialBijection::from_pairs(relation.carrier(), pairs));
    }
  }
  GeneratorSet generators(relation, std::move(gens));
  return Presentation{std::move(relation), std::move(generators)};
}

Presentation load_presentation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open presentation file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_presentation(buf.str());
}

std::string serialize_presentation(const FinRelation& R, const GeneratorSet& F) {
  Json doc;
  Json weights = Json::array();
  for (int x = 0; x < R.size(); ++x)
    weights.push_back(rational_to_string(R.carrier()->weight(x)));
  doc["weights"] = std::move(weights);
  Json classes = Json::array();
  for (const auto& cls : R.classes()) {
    Json points = Json::array();
    for (int x : cls) points.push_back(x);
    classes.push_back(std::move(points));
  }
  doc["classes"] = std::move(classes);
  Json gens = Json::object();
  for (const auto& [name, s] : F.generators()) {
    Json mapping = Json::object();
    for (int x = 0; x < R.size(); ++x)
      if (s.defined(x)) mapping[std::to_string(x)] = s.image(x);
    gens[name] = std::move(mapping);
  }
  doc["generators"] = std::move(gens);
  return doc.dump(2) + "\n";
}

}  // namespace soficlab

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "locdens/bandwidth.hpp"
#include "locdens/certificates.hpp"
#include "locdens/montecarlo.hpp"

namespace locdens {

// Minimal ordered JSON value. Reports must be byte-identical across reruns
// and worker counts, so key order is insertion order and every double is
// printed with 17 significant digits.
class Json {
public:
  enum class Type { null, boolean, integer, number, string, array, object };

  Json() : type_(Type::null) {}
  static Json boolean(bool b);
  static Json integer(std::int64_t v);
  static Json number(double v);
  static Json string(std::string s);
  static Json array();
  static Json object();

  Type type() const { return type_; }
  void push_back(Json v);                      // arrays
  void set(const std::string& key, Json v);    // objects

  std::string dump(int indent = 0) const;

private:
  void dump_to(std::string& out, int indent, int depth) const;

  Type type_;
  bool bool_ = false;
  std::int64_t int_ = 0;
  double num_ = 0.0;
  std::string str_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> fields_;
};

Json to_json(const Vec& v);
Json to_json(const Mat& m);
Json to_json(const ConditionFlags& flags);
Json to_json(const Certificate& cert);
Json to_json(const PopulationSummary& summary);
Json to_json(const DensityOracle& oracle);
Json to_json(const VerifyRow& row);
Json to_json(const CellResult& cell, bool with_summary);
Json to_json(const SimulationReport& report);
Json to_json(const BandwidthReport& report);

std::string dump_reps_csv(const CellResult& cell, double primary_z);

}  // namespace locdens

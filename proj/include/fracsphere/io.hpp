#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "fracsphere/conformal.hpp"
#include "fracsphere/degree.hpp"
#include "fracsphere/fracop.hpp"
#include "fracsphere/variational.hpp"

namespace fracsphere {

using Json = nlohmann::ordered_json;

// {"n":2,"sigma":s,"lmax":L,"coeffs":[[k,m,value],...]}, k ascending, m = -k..k
Json to_json(const SpectralField& c, const FracOperatorSpec& spec);
SpectralField spectral_from_json(const Json& j);

// {"grid":{"n":n,"counts":[...]},"values":[...]}
Json to_json(const GridField& f);
GridField grid_field_from_json(const Json& j);

// {"P":[...],"t":t}; P has n+1 entries
Json to_json(const ConformalParam& c, int n);
ConformalParam conformal_from_json(const Json& j);

Json to_json(const SolutionRecord& r, const FracOperatorSpec& spec);
Json to_json(const DegreeResult& r, int n);
Json to_json(const AubinReport& r);
Json to_json(const IndexCount& r);

CriticalPointModel model_from_json(const Json& j, int n);

// Shortest text that reads back to the same double; "nan"/"inf" spelled out.
std::string format_double(double x);

// RFC 4180: header row, CRLF line ends, fields quoted when they contain a comma,
// quote or line break.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  void add_row(const std::vector<double>& row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace fracsphere

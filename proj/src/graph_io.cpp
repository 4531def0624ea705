#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kramers/graph.hpp"

namespace kramers {
namespace {

// Accepts plain numbers and the shorthands pi, -pi, pi/2, -pi/2.
Real parse_angle(const std::string& token, const std::string& source, int line) {
  static const std::pair<const char*, Real> kNamed[] = {
      {"pi", kPi}, {"-pi", -kPi}, {"pi/2", 0.5 * kPi}, {"-pi/2", -0.5 * kPi}};
  for (const auto& [name, value] : kNamed) {
    if (token == name) return value;
  }
  try {
    std::size_t used = 0;
    const Real v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected a number, got '" + token + "'");
  }
}

Real parse_real(const std::string& token, const std::string& source, int line) {
  try {
    std::size_t used = 0;
    const Real v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected a number, got '" + token + "'");
  }
}

int parse_int(const std::string& token, const std::string& source, int line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected an integer, got '" + token + "'");
  }
}

}  // namespace

GraphSpec read_graph_spec(std::istream& in, const std::string& source) {
  GraphSpec spec;
  bool have_vertices = false;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    const auto& key = tok[0];
    auto expect = [&](std::size_t count) {
      if (tok.size() != count) {
        throw ParseError(source, line, "'" + key + "' takes " + std::to_string(count - 1) + " field(s), got " +
                                           std::to_string(tok.size() - 1));
      }
    };
    if (key == "vertices") {
      expect(2);
      spec.vertex_count = parse_int(tok[1], source, line);
      if (spec.vertex_count < 1) throw ParseError(source, line, "vertex count must be positive");
      have_vertices = true;
    } else if (key == "symmetry") {
      expect(2);
      if (tok[1] == "gse-paired") {
        spec.symmetry = GraphSymmetry::kGsePaired;
      } else if (tok[1] == "free") {
        spec.symmetry = GraphSymmetry::kFree;
      } else {
        throw ParseError(source, line, "symmetry must be 'gse-paired' or 'free', got '" + tok[1] + "'");
      }
    } else if (key == "eta") {
      expect(2);
      spec.absorption_eta = parse_real(tok[1], source, line);
    } else if (key == "bond") {
      if (tok.size() < 4 || tok.size() > 6) {
        throw ParseError(source, line, "bond takes: from to length_m [A_phase_rad [extra_phase_rad]]");
      }
      Bond b;
      b.from = parse_int(tok[1], source, line);
      b.to = parse_int(tok[2], source, line);
      b.length = parse_real(tok[3], source, line);
      if (tok.size() > 4) b.vector_phase = parse_angle(tok[4], source, line);
      if (tok.size() > 5) b.extra_phase = parse_angle(tok[5], source, line);
      if (!(b.length > 0.0)) throw ParseError(source, line, "bond length must be positive");
      if (b.from == b.to) throw ParseError(source, line, "self-loop bond");
      if (have_vertices && (b.from < 0 || b.to < 0 || b.from >= spec.vertex_count || b.to >= spec.vertex_count)) {
        throw ParseError(source, line, "bond endpoint outside the declared vertex range");
      }
      spec.bonds.push_back(b);
    } else if (key == "lead") {
      expect(2);
      spec.leads.push_back(parse_int(tok[1], source, line));
    } else {
      throw ParseError(source, line, "unknown keyword '" + key + "'");
    }
  }
  if (!have_vertices) throw ParseError(source, line, "missing 'vertices' declaration");
  try {
    spec.validate();
  } catch (const Error& e) {
    throw ParseError(source, line, e.what());
  }
  return spec;
}

GraphSpec read_graph_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_graph_spec(in, path);
}

void write_graph_spec(std::ostream& out, const GraphSpec& spec) {
  out << "# quantum graph specification\n"
      << "# bond <from> <to> <length_m> <A_phase_rad> <extra_phase_rad>\n";
  out << "symmetry " << (spec.symmetry == GraphSymmetry::kGsePaired ? "gse-paired" : "free") << "\n";
  out << "vertices " << spec.vertex_count << "\n";
  out << "eta " << spec.absorption_eta << "\n";
  out << std::setprecision(17);
  for (const auto& b : spec.bonds) {
    out << "bond " << b.from << ' ' << b.to << ' ' << b.length << ' ' << b.vector_phase << ' ' << b.extra_phase
        << "\n";
  }
  for (int v : spec.leads) out << "lead " << v << "\n";
}

}  // namespace kramers

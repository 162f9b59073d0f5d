#include "pnm/network_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pnm/csv.hpp"
#include "pnm/error.hpp"

namespace pnm {

namespace {

struct TagWriter {
  std::ostream& out;
  void operator()(const Interior&) const { out << "interior"; }
  void operator()(const FluxInlet& t) const { out << "flux_inlet " << format_double(t.mass_rate); }
  void operator()(const PressureInletCapillary& t) const {
    out << "pressure_inlet_capillary " << format_double(t.wetting_pressure) << ' ' << format_double(t.entry_pressure);
  }
  void operator()(const PressureOutlet& t) const { out << "pressure_outlet " << format_double(t.wetting_pressure); }
};

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::InvalidInput, "network file line " + std::to_string(line) + ": " + msg);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line split into whitespace tokens.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    bad(number_, "unexpected end of file");
  }

  std::size_t line() const { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

std::size_t to_index(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) bad(line, "bad integer '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    bad(line, "bad integer '" + s + "'");
  }
}

double to_real(const std::string& s, std::size_t line) {
  try {
    return parse_double(s);
  } catch (const Error&) {
    bad(line, "bad number '" + s + "'");
  }
}

}  // namespace

void write_network(std::ostream& out, const Network& net) {
  out << "# pnm-network format 1\n";
  out << "pores " << net.pore_count() << '\n';
  for (const Pore& p : net.pores()) {
    out << p.id << ' ' << format_double(p.center.x) << ' ' << format_double(p.center.y) << ' '
        << format_double(p.center.z) << ' ' << format_double(p.radius) << ' ';
    std::visit(TagWriter{out}, p.boundary);
    out << '\n';
  }
  out << "throats " << net.throat_count() << '\n';
  for (const Throat& t : net.throats()) {
    out << t.id << ' ' << t.i << ' ' << t.j << ' ' << format_double(t.radius) << ' ' << format_double(t.length)
        << ' ' << format_double(t.entry_pressure) << '\n';
  }
}

Network read_network(std::istream& in) {
  LineReader reader(in);
  auto head = reader.next();
  if (head.size() != 2 || head[0] != "pores") bad(reader.line(), "expected 'pores <count>'");
  const std::size_t n = to_index(head[1], reader.line());
  std::vector<Pore> pores(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto tok = reader.next();
    const std::size_t line = reader.line();
    if (tok.size() < 6) bad(line, "pore record needs id x y z r tag");
    Pore& p = pores[k];
    p.id = to_index(tok[0], line);
    p.center = {to_real(tok[1], line), to_real(tok[2], line), to_real(tok[3], line)};
    p.radius = to_real(tok[4], line);
    p.volume = cubic_pore_volume(p.radius);
    const std::string& tag = tok[5];
    const std::size_t extra = tok.size() - 6;
    if (tag == "interior" && extra == 0) {
      p.boundary = Interior{};
    } else if (tag == "flux_inlet" && extra == 1) {
      p.boundary = FluxInlet{to_real(tok[6], line)};
    } else if (tag == "pressure_inlet_capillary" && extra == 2) {
      p.boundary = PressureInletCapillary{to_real(tok[6], line), to_real(tok[7], line)};
    } else if (tag == "pressure_outlet" && extra == 1) {
      p.boundary = PressureOutlet{to_real(tok[6], line)};
    } else {
      bad(line, "bad boundary tag '" + tag + "'");
    }
  }
  head = reader.next();
  if (head.size() != 2 || head[0] != "throats") bad(reader.line(), "expected 'throats <count>'");
  const std::size_t m = to_index(head[1], reader.line());
  std::vector<Throat> throats(m);
  for (std::size_t k = 0; k < m; ++k) {
    auto tok = reader.next();
    const std::size_t line = reader.line();
    if (tok.size() != 6) bad(line, "throat record needs id i j r L p_ce");
    Throat& t = throats[k];
    t.id = to_index(tok[0], line);
    t.i = to_index(tok[1], line);
    t.j = to_index(tok[2], line);
    t.radius = to_real(tok[3], line);
    t.length = to_real(tok[4], line);
    t.entry_pressure = to_real(tok[5], line);
  }
  try {
    return Network(std::move(pores), std::move(throats));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("network file: ") + e.what());
  }
}

void write_network_file(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_network(out, net);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Network read_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return read_network(in);
}

}  // namespace pnm

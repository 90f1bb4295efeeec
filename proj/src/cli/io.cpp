#include "hrfi/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "hrfi/errors.hpp"

namespace hrfi::io {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& s, std::size_t line_no) {
  // strtod handles the full %.17g output range, including exponents.
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw SchemaError("line " + std::to_string(line_no) +
                      ": not a number: '" + s + "'");
  }
  return value;
}

long long parse_int(const std::string& s, std::size_t line_no) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError("line " + std::to_string(line_no) +
                      ": not an integer: '" + s + "'");
  }
  return value;
}

ForceLevel parse_force(const std::string& s, std::size_t line_no) {
  const double v = parse_double(s, line_no);
  if (!(v > 0.0)) {
    throw SchemaError("line " + std::to_string(line_no) +
                      ": force must be positive");
  }
  return ForceLevel(v);
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("empty input: expected header '" + std::string(header) +
                      "'");
  }
  if (strip_cr(line) != header) {
    throw SchemaError("bad header '" + strip_cr(line) + "', expected '" +
                      std::string(header) + "'");
  }
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trials(std::ostream& out,
                  const std::vector<ReproductionTrial>& trials) {
  out << kTrialHeader << '\n';
  for (std::size_t i = 0; i < trials.size(); ++i) {
    out << i << ',' << format_double(trials[i].stimulus.value()) << ','
        << format_double(trials[i].response.value()) << '\n';
  }
}

std::vector<ReproductionTrial> read_trials(std::istream& in) {
  expect_header(in, kTrialHeader);
  std::vector<ReproductionTrial> trials;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != 3) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": expected 3 fields");
    }
    parse_int(fields[0], line_no);
    trials.push_back(
        {parse_force(fields[1], line_no), parse_force(fields[2], line_no)});
  }
  if (trials.empty()) throw SchemaError("no trial rows");
  return trials;
}

void write_trace_rows(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << kTraceHeader << '\n';
  for (const auto& row : rows) {
    out << row.run << ',' << row.k << ','
        << (row.phase == Phase::kRobot ? "robot" : "human") << ','
        << format_double(row.force) << '\n';
  }
}

std::vector<TraceRow> read_trace_rows(std::istream& in) {
  expect_header(in, kTraceHeader);
  std::vector<TraceRow> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != 4) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": expected 4 fields");
    }
    const long long run = parse_int(fields[0], line_no);
    const long long k = parse_int(fields[1], line_no);
    if (run < 0 || k < 0) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": negative index");
    }
    Phase phase;
    if (fields[2] == "robot") {
      phase = Phase::kRobot;
    } else if (fields[2] == "human") {
      phase = Phase::kHuman;
    } else {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": phase must be robot or human");
    }
    const double force = parse_double(fields[3], line_no);
    if (!std::isfinite(force)) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": force must be finite");
    }
    rows.push_back({static_cast<std::size_t>(run), static_cast<std::size_t>(k),
                    phase, force});
  }
  if (rows.empty()) throw SchemaError("no trace rows");
  return rows;
}

std::vector<TraceRow> to_rows(const std::vector<InteractionTrace>& traces) {
  std::vector<TraceRow> rows;
  for (std::size_t run = 0; run < traces.size(); ++run) {
    for (const auto& p : traces[run].pairs) {
      rows.push_back({run, p.k, Phase::kRobot, p.robot});
      rows.push_back({run, p.k + 1, Phase::kHuman, p.human});
    }
  }
  return rows;
}

std::vector<InteractionTrace> from_rows(const std::vector<TraceRow>& rows) {
  struct Partial {
    std::map<std::size_t, double> robot;
    std::map<std::size_t, double> human;
  };
  std::map<std::size_t, Partial> runs;
  for (const auto& row : rows) {
    if (!(row.force > 0.0)) {
      throw SchemaError("run " + std::to_string(row.run) +
                        ": interaction forces must be positive");
    }
    auto& slot = row.phase == Phase::kRobot ? runs[row.run].robot
                                            : runs[row.run].human;
    if (!slot.emplace(row.k, row.force).second) {
      throw SchemaError("run " + std::to_string(row.run) + ": duplicate row");
    }
  }
  if (runs.empty()) throw SchemaError("no trace rows");

  std::vector<InteractionTrace> traces;
  std::size_t expected_run = 0;
  for (const auto& [run, partial] : runs) {
    if (run != expected_run++) throw SchemaError("run indices not contiguous");
    const std::size_t n = partial.robot.size();
    if (n == 0 || partial.human.size() != n) {
      throw SchemaError("run " + std::to_string(run) +
                        ": robot and human rows do not pair up");
    }
    InteractionTrace trace;
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = partial.robot.find(k);
      const auto h = partial.human.find(k + 1);
      if (r == partial.robot.end() || h == partial.human.end()) {
        throw SchemaError("run " + std::to_string(run) + ": missing phase " +
                          std::to_string(k));
      }
      trace.pairs.push_back({k, r->second, h->second});
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

void write_traces(std::ostream& out,
                  const std::vector<InteractionTrace>& traces) {
  write_trace_rows(out, to_rows(traces));
}

std::vector<InteractionTrace> read_traces(std::istream& in) {
  return from_rows(read_trace_rows(in));
}

std::vector<ReproductionTrial> read_trials_file(const std::string& path) {
  auto in = open(path);
  return read_trials(in);
}

std::vector<InteractionTrace> read_traces_file(const std::string& path) {
  auto in = open(path);
  return read_traces(in);
}

std::string git_blob_hash(std::string_view content) {
  const std::string prefix = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

}  // namespace hrfi::io

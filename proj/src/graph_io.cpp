#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ktsbm/sbm_core.hpp"

namespace ktsbm {
namespace {

bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') throw ParseError("CR line ending (expected LF)", line_no);
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

// Exactly `count` integers on the line, nothing else.
std::vector<long long> parse_ints(const std::string& line, int count, int line_no) {
  std::istringstream ss(line);
  std::vector<long long> out;
  long long v;
  while (ss >> v) out.push_back(v);
  if (!ss.eof() || static_cast<int>(out.size()) != count)
    throw ParseError("expected " + std::to_string(count) + " integers, got '" + line + "'", line_no);
  return out;
}

}  // namespace

Graph read_graph(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!next_content_line(in, line, line_no)) throw ParseError("missing header 'n m'", 1);
  const auto header = parse_ints(line, 2, line_no);
  const long long n = header[0], m = header[1];
  if (n < 1) throw ParseError("node count must be positive", line_no);
  if (m < 0 || m > n * (n - 1) / 2) throw ParseError("edge count out of range", line_no);
  Graph g(static_cast<int>(n));
  long long seen = 0;
  while (next_content_line(in, line, line_no)) {
    const auto e = parse_ints(line, 2, line_no);
    const long long i = e[0], j = e[1];
    if (i == j) throw ParseError("self-loop " + std::to_string(i) + " " + std::to_string(j), line_no);
    if (i < 1 || j < 1 || i > n || j > n) throw ParseError("node index out of range [1,n]", line_no);
    if (i > j) throw ParseError("edge must be written as 'i j' with i < j", line_no);
    if (g.has_edge(static_cast<int>(i - 1), static_cast<int>(j - 1)))
      throw ParseError("duplicate edge " + std::to_string(i) + " " + std::to_string(j), line_no);
    g.set_edge(static_cast<int>(i - 1), static_cast<int>(j - 1));
    ++seen;
  }
  if (seen != m)
    throw ParseError("header declares " + std::to_string(m) + " edges but file has " + std::to_string(seen),
                     line_no);
  return g;
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.n() << ' ' << g.edge_count() << '\n';
  for (auto [i, j] : g.edges()) out << (i + 1) << ' ' << (j + 1) << '\n';
}

LabelVector read_labels(std::istream& in, int k) {
  std::string line;
  int line_no = 0;
  std::vector<int> labels;
  while (next_content_line(in, line, line_no)) {
    const auto v = parse_ints(line, 1, line_no)[0];
    if (v < 1 || (k > 0 && v > k)) throw ParseError("label out of range", line_no);
    labels.push_back(static_cast<int>(v));
  }
  if (k <= 0) k = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end());
  return LabelVector::from_one_based(labels, k);
}

void write_labels(std::ostream& out, const LabelVector& z) {
  for (int v : z.values()) out << (v + 1) << '\n';
}

}  // namespace ktsbm

#include <istream>
#include <sstream>
#include <unordered_map>

#include "graphkrig/error.hpp"
#include "graphkrig/graph.hpp"
#include "graphkrig/textio.hpp"

namespace graphkrig {

NamedEdgeList read_edge_list(std::istream& in, const std::string& source) {
  NamedEdgeList out;
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](std::string_view id) {
    auto [it, inserted] = index.try_emplace(std::string(id), out.names.size());
    if (inserted) out.names.emplace_back(id);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = split(body, '\t');
    auto bad = [&](const std::string& why) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": " << why;
      fail(ErrorCode::Parse, msg.str());
    };
    if (fields.size() < 2 || fields.size() > 3) bad("expected src<TAB>dst[<TAB>weight]");
    const auto src = trim(fields[0]);
    const auto dst = trim(fields[1]);
    if (src.empty() || dst.empty()) bad("empty node id");
    double weight = 1.0;
    if (fields.size() == 3) {
      auto w = parse_number(fields[2]);
      if (!w) bad("weight is not a number");
      if (*w < 0.0) bad("negative weight");
      weight = *w;
    }
    const std::size_t s = intern(src);
    const std::size_t d = intern(dst);
    out.rows.push_back({s, d, weight});
  }
  return out;
}

}  // namespace graphkrig

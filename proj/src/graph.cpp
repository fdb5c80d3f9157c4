#include "stpbp/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <zlib.h>

namespace stpbp {

uint64_t graph::edge_count() const {
    uint64_t arcs = 0;
    for (const auto& nb : adjacency)
        arcs += nb.size();
    return directed ? arcs : arcs / 2;
}

const std::vector<uint32_t>& graph::neighbors(uint32_t v) const {
    if (v >= adjacency.size())
        throw std::range_error("graph::neighbors: node id out of range");
    return adjacency[v];
}

namespace {

bool parse_id(const char* begin, const char* end, int64_t& out) {
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

// splits a line into tokens and parses exactly two integer ids
bool parse_edge_line(const std::string& line, int64_t& u, int64_t& v) {
    size_t i = 0, n = line.size();
    const char* ptr[2][2];
    int tok = 0;
    while (i < n) {
        while (i < n && std::isspace(uint8_t(line[i])))
            ++i;
        if (i == n)
            break;
        size_t j = i;
        while (j < n && !std::isspace(uint8_t(line[j])))
            ++j;
        if (tok == 2)
            return false;
        ptr[tok][0] = line.data() + i;
        ptr[tok][1] = line.data() + j;
        ++tok;
        i = j;
    }
    if (tok != 2)
        return false;
    return parse_id(ptr[0][0], ptr[0][1], u) && parse_id(ptr[1][0], ptr[1][1], v);
}

graph build_graph(std::vector<std::pair<int64_t, int64_t>>& edges,
                  bool directed, load_report* report) {
    // canonical remap: internal id = rank of the original id
    std::vector<int64_t> ids;
    ids.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
        ids.push_back(u);
        ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() > (uint64_t(1) << 32))
        throw std::runtime_error("edge list has more than 2^32 nodes");

    std::unordered_map<int64_t, uint32_t> rank;
    rank.reserve(ids.size());
    for (uint32_t i = 0; i < ids.size(); ++i)
        rank.emplace(ids[i], i);

    graph g;
    g.directed = directed;
    g.original_ids = std::move(ids);
    g.adjacency.resize(g.original_ids.size());

    uint64_t self_loops = 0;
    for (const auto& [ou, ov] : edges) {
        if (ou == ov) {
            ++self_loops;
            continue;
        }
        uint32_t u = rank.find(ou)->second;
        uint32_t v = rank.find(ov)->second;
        g.adjacency[u].push_back(v);
        if (!directed)
            g.adjacency[v].push_back(u);
    }
    edges.clear();
    edges.shrink_to_fit();

    uint64_t dupes = 0;
    for (auto& nb : g.adjacency) {
        std::sort(nb.begin(), nb.end());
        auto last = std::unique(nb.begin(), nb.end());
        dupes += nb.end() - last;
        nb.erase(last, nb.end());
        nb.shrink_to_fit();
    }
    if (!directed)
        dupes /= 2;

    if (report) {
        report->self_loops_dropped = self_loops;
        report->duplicates_dropped = dupes;
    }
    return g;
}

} // namespace

graph load_edge_list(std::istream& in, bool directed, load_report* report) {
    std::vector<std::pair<int64_t, int64_t>> edges;
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || line[first] == '#')
            continue;
        int64_t u, v;
        if (!parse_edge_line(line, u, v))
            throw std::runtime_error("edge list parse error at line "
                                     + std::to_string(lineno));
        edges.emplace_back(u, v);
    }
    if (in.bad())
        throw std::runtime_error("edge list read failure at line "
                                 + std::to_string(lineno));
    if (edges.empty())
        throw std::runtime_error("edge list contains no edges");
    if (report) {
        *report = load_report{};
        report->lines_read = lineno;
    }
    return build_graph(edges, directed, report);
}

namespace {

std::string read_gzip_file(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::string data;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0)
        data.append(buf, size_t(n));
    bool ok = n == 0;
    gzclose(f);
    if (!ok)
        throw std::runtime_error("gzip read failure in " + path);
    return data;
}

} // namespace

graph load_edge_list_file(const std::string& path, bool directed,
                          load_report* report) {
    if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
        std::istringstream in(read_gzip_file(path));
        return load_edge_list(in, directed, report);
    }
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return load_edge_list(in, directed, report);
}

void save_edge_list(const graph& g, std::ostream& out) {
    for (uint32_t u = 0; u < g.node_count(); ++u) {
        for (uint32_t v : g.adjacency[u]) {
            if (!g.directed && v < u)
                continue;
            out << g.original_ids[u] << '\t' << g.original_ids[v] << '\n';
        }
    }
    if (!out)
        throw std::runtime_error("edge list write failure");
}

degree_report degree_stats(const graph& g) {
    degree_report r;
    uint64_t total = 0;
    for (const auto& nb : g.adjacency) {
        uint32_t d = uint32_t(nb.size());
        total += d;
        r.max = std::max(r.max, d);
        ++r.histogram[d];
    }
    if (!g.adjacency.empty())
        r.mean = double(total) / double(g.adjacency.size());
    return r;
}

} // namespace stpbp

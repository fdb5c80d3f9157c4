#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace stpbp {

/* Simple adjacency-list graph over contiguous node ids 0..n-1.
 * External edge lists may use arbitrary integer labels; those are kept in
 * original_ids (sorted ascending, so the mapping is canonical for a given
 * edge set and round-trips exactly).
 */
struct graph {
    std::vector<std::vector<uint32_t>> adjacency;
    std::vector<int64_t> original_ids;
    bool directed = false;

    uint32_t node_count() const { return uint32_t(adjacency.size()); }
    uint64_t edge_count() const;          // directed: arcs; undirected: edges
    const std::vector<uint32_t>& neighbors(uint32_t v) const;
};

struct load_report {
    uint64_t lines_read = 0;
    uint64_t self_loops_dropped = 0;
    uint64_t duplicates_dropped = 0;
};

struct degree_report {
    double mean = 0.0;
    uint32_t max = 0;
    std::map<uint32_t, uint64_t> histogram;
};

// Whitespace-separated "u v" pairs, one per line; '#' starts a comment
// line; blank lines are skipped. Self-loops and duplicate edges are
// dropped (counted in the report). Undirected mode symmetrizes.
// Malformed lines raise std::runtime_error naming the line number.
graph load_edge_list(std::istream& in, bool directed = false,
                     load_report* report = nullptr);

// As above; files ending in ".gz" are decompressed transparently.
graph load_edge_list_file(const std::string& path, bool directed = false,
                          load_report* report = nullptr);

// Canonical edge list in original-id labels; reloading yields an
// identical graph (same adjacency, same id table).
void save_edge_list(const graph& g, std::ostream& out);

degree_report degree_stats(const graph& g);

} // namespace stpbp

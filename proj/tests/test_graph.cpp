#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "stpbp/graph.hpp"
#include "stpbp/rng.hpp"
#include "support/helpers.hpp"

using namespace stpbp;

namespace {

graph from_text(const std::string& text, bool directed = false,
                load_report* rep = nullptr) {
    std::istringstream in(text);
    return load_edge_list(in, directed, rep);
}

} // namespace

TEST_CASE("path graph hand counts") {
    graph g = from_text("0 1\n1 2\n2 3\n");
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() == 3);
    CHECK(g.neighbors(0).size() == 1);
    CHECK(g.neighbors(1).size() == 2);
    CHECK(g.neighbors(3).size() == 1);
    auto deg = degree_stats(g);
    CHECK(deg.max == 2);
    CHECK(deg.mean == doctest::Approx(6.0 / 4.0));
}

TEST_CASE("star graph hand counts") {
    graph g = from_text("5 1\n5 2\n5 3\n5 4\n5 6\n");
    CHECK(g.node_count() == 6);
    CHECK(g.edge_count() == 5);
    auto deg = degree_stats(g);
    CHECK(deg.max == 5);
    // center keeps its original label through the id remap
    bool found = false;
    for (uint32_t v = 0; v < g.node_count(); ++v)
        if (g.neighbors(v).size() == 5) {
            found = true;
            CHECK(g.original_ids[v] == 5);
        }
    CHECK(found);
}

TEST_CASE("comments, blanks, duplicates, self loops") {
    load_report rep;
    graph g = from_text("# header\n\n1 2\n2 1\n1 2\n3 3\n2 4\n", false, &rep);
    CHECK(g.node_count() == 4);  // the self-loop endpoint still registers
    CHECK(g.edge_count() == 2);
    CHECK(rep.self_loops_dropped == 1);
    CHECK(rep.duplicates_dropped == 2);
    CHECK(rep.lines_read == 7);
}

TEST_CASE("directed edges are not merged") {
    graph g = from_text("1 2\n2 1\n", true);
    CHECK(g.directed);
    CHECK(g.edge_count() == 2);
    CHECK(g.neighbors(0).size() == 1);
    CHECK(g.neighbors(1).size() == 1);
}

TEST_CASE("malformed input names the line") {
    std::istringstream bad("1 2\nx y\n");
    CHECK_THROWS_WITH_AS(load_edge_list(bad), doctest::Contains("line 2"),
                         std::runtime_error);
    std::istringstream wide("1 2 3\n");
    CHECK_THROWS_AS(load_edge_list(wide), std::runtime_error);
    std::istringstream short1("1\n");
    CHECK_THROWS_AS(load_edge_list(short1), std::runtime_error);
    std::istringstream empty("# only a comment\n");
    CHECK_THROWS_AS(load_edge_list(empty), std::runtime_error);
    std::istringstream neg("1 -2\n");
    CHECK(load_edge_list(neg).node_count() == 2);  // signed labels are fine
}

TEST_CASE("round trip is identical text") {
    rng r(41);
    for (int rep = 0; rep < 20; ++rep) {
        std::ostringstream raw;
        int n = 2 + int(r.next_below(40));
        int edges = 1 + int(r.next_below(120));
        for (int e = 0; e < edges; ++e) {
            uint64_t u = r.next_below(uint64_t(n)) * 7 + 3;  // sparse labels
            uint64_t v = r.next_below(uint64_t(n)) * 7 + 3;
            if (u == v) continue;
            raw << u << ' ' << v << '\n';
        }
        if (raw.str().empty()) continue;
        graph g1 = from_text(raw.str());
        std::ostringstream once;
        save_edge_list(g1, once);
        graph g2 = from_text(once.str());
        std::ostringstream twice;
        save_edge_list(g2, twice);
        REQUIRE(once.str() == twice.str());
        REQUIRE(g1.node_count() == g2.node_count());
        REQUIRE(g1.edge_count() == g2.edge_count());
    }
}

TEST_CASE("degree sum equals twice the edge count") {
    graph g = testsup::scale_free_graph(500, 4, 9);
    uint64_t sum = 0;
    for (uint32_t v = 0; v < g.node_count(); ++v) sum += g.neighbors(v).size();
    CHECK(sum == 2 * g.edge_count());
    auto deg = degree_stats(g);
    uint64_t hist_total = 0;
    for (const auto& [d, count] : deg.histogram) hist_total += count;
    CHECK(hist_total == g.node_count());
}

TEST_CASE("gzip edge list loads the same graph") {
    namespace fs = std::filesystem;
    fs::path dir = fs::path("tmp_graph");
    fs::create_directories(dir);
    std::string text = "10 20\n20 30\n30 10\n30 40\n";
    fs::path gz = dir / "small.txt.gz";
    gzFile f = gzopen(gz.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    REQUIRE(gzwrite(f, text.data(), unsigned(text.size())) == int(text.size()));
    gzclose(f);

    graph plain = from_text(text);
    graph zipped = load_edge_list_file(gz.string());
    CHECK(zipped.node_count() == plain.node_count());
    CHECK(zipped.edge_count() == plain.edge_count());
    std::ostringstream a, b;
    save_edge_list(plain, a);
    save_edge_list(zipped, b);
    CHECK(a.str() == b.str());
    fs::remove_all(dir);
}

TEST_CASE("missing file is an error") {
    CHECK_THROWS_AS(load_edge_list_file("no_such_file_here.txt"), std::runtime_error);
}

TEST_CASE("ego network snapshot sanity" *
          doctest::skip(!std::filesystem::exists("../../data/twitter_combined.txt") &&
                        !std::filesystem::exists("../../data/twitter_combined.txt.gz"))) {
    std::string path = "../../data/twitter_combined.txt";
    if (!std::filesystem::exists(path)) path += ".gz";
    graph g = load_edge_list_file(path);
    CHECK(g.node_count() == 81306);
    CHECK(degree_stats(g).mean > 20.0);
}

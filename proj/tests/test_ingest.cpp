#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gaeco/ingest.hpp"
#include "gaeco/synthetic.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace gaeco;
namespace fs = std::filesystem;

TEST_CASE("content/cites toy dataset") {
    TempDir dir;
    const auto content = dir.write("toy.content", "p1 1 0 1 Theory\np2 0 1 1 Neural_Networks\n");
    const auto cites = dir.write("toy.cites", "p1 p2\n");
    const auto b = load_content_cites(content, cites);
    CHECK(b.graph.num_nodes() == 2);
    CHECK(b.features.dim() == 3);
    CHECK(b.graph.num_undirected_edges() == 1);
    CHECK(b.graph.has_edge(0, 1));
    CHECK(b.graph.has_edge(1, 0));
    CHECK(b.k_truth == 2);
    CHECK(b.truth.labels() == std::vector<Index>{0, 1});
    CHECK(b.class_names == std::vector<std::string>{"Theory", "Neural_Networks"});
    CHECK(b.node_ids == std::vector<std::string>{"p1", "p2"});
    CHECK(b.features.values()(1, 1) == 1.0);
}

TEST_CASE("content/cites: dangling citations are dropped and counted") {
    TempDir dir;
    const auto content = dir.write("d.content", "a 1 0 x\nb 0 1 y\nc 1 1 x\n");
    const auto cites = dir.write("d.cites", "a b\nb zz\nqq c\nc a\n");
    const auto b = load_content_cites(content, cites);
    CHECK(b.raw_edge_lines == 4);
    CHECK(b.dropped_edges == 2);
    CHECK(b.graph.num_undirected_edges() == 2);
    CHECK(b.graph.num_nodes() == 3);

    const auto kept = load_content_cites(content, cites, {true, DanglingPolicy::kAddNode});
    CHECK(kept.graph.num_nodes() == 5);
    CHECK(kept.added_nodes == 2);
    CHECK(kept.dropped_edges == 0);
    CHECK(kept.features.values().row(4).isZero());
}

TEST_CASE("content/cites errors") {
    TempDir dir;
    const auto cites = dir.write("e.cites", "a b\n");
    CHECK_THROWS_AS(load_content_cites(dir.write("ragged.content", "a 1 0 x\nb 1 y\n"), cites), ParseError);
    CHECK_THROWS_AS(load_content_cites(dir.write("dup.content", "a 1 x\na 0 y\n"), cites), ParseError);
    CHECK_THROWS_AS(load_content_cites(dir.write("empty.content", ""), cites), ParseError);
    CHECK_THROWS_AS(load_content_cites(dir.write("nan.content", "a 1 x\nb q y\n"), cites), ParseError);
    CHECK_THROWS_AS(load_content_cites(dir.write("ok.content", "a 1 x\nb 0 y\n"), dir.write("bad.cites", "a b c\n")),
                    ParseError);
    CHECK_THROWS_AS(load_content_cites(dir.path / "missing.content", cites), ParseError);
}

TEST_CASE("generic triangle and isolated nodes") {
    TempDir dir;
    const auto tri = load_generic(dir.write("edges.tsv", "# triangle\n0\t1\n1\t2\n2\t0\n"),
                                  dir.write("features.csv", "1,0\n0,1\n0.5,0.5\n"), dir.write("labels.txt", "0\n1\n1\n"));
    CHECK(tri.graph.num_nodes() == 3);
    CHECK(tri.features.dim() == 2);
    CHECK(tri.graph.num_undirected_edges() == 3);
    CHECK(tri.k_truth == 2);

    const auto iso = load_generic(dir.write("empty.tsv", ""), dir.write("f4.csv", "1\n2\n3\n4\n"),
                                  dir.write("l4.txt", "0\n0\n1\n1\n"));
    CHECK(iso.graph.num_nodes() == 4);
    CHECK(iso.graph.num_undirected_edges() == 0);
    for (Index i = 0; i < 4; ++i) CHECK(iso.graph.degree(i) == 1);
}

TEST_CASE("generic errors") {
    TempDir dir;
    const auto edges = dir.write("edges.tsv", "0\t1\n");
    const auto features = dir.write("features.csv", "1,0\n0,1\n1,1\n");
    CHECK_THROWS_AS(load_generic(edges, features, dir.write("short.txt", "0\n1\n")), ParseError);
    CHECK_THROWS_AS(load_generic(edges, dir.write("nan.csv", "1,0\nx,1\n1,1\n"), dir.write("l.txt", "0\n1\n0\n")),
                    ParseError);
    CHECK_THROWS_AS(load_generic(edges, dir.write("ragged.csv", "1,0\n1\n1,1\n"), dir.write("l2.txt", "0\n1\n0\n")),
                    ParseError);
    CHECK_THROWS_AS(load_generic(dir.write("far.tsv", "0\t9\n"), features, dir.write("l3.txt", "0\n1\n0\n")),
                    InvalidArgument);
    CHECK_THROWS_AS(load_generic(edges, features, dir.write("neg.txt", "0\n-1\n0\n")), ParseError);
}

TEST_CASE("generic format round-trips exactly") {
    TempDir dir;
    for (bool loops : {true, false}) {
        SyntheticSpec spec;
        spec.nodes = 80;
        spec.communities = 4;
        spec.features = 20;
        spec.seed = 11;
        auto original = make_synthetic(spec, {loops, DanglingPolicy::kDrop});
        // Non-integer features exercise the 17-digit formatting.
        Rng rng(5);
        Matrix x = original.features.values();
        x += oracle::random_matrix(rng, x.rows(), x.cols(), 0, 1e-3);
        original.features = FeatureMatrix(x);

        const fs::path out = dir.path / (loops ? "loops" : "plain");
        save_generic(original, out);
        const auto back = load_generic(out / "edges.tsv", out / "features.csv", out / "labels.txt", {loops});
        CHECK(back.graph.row_offsets() == original.graph.row_offsets());
        CHECK(back.graph.col_indices() == original.graph.col_indices());
        CHECK(back.features.values() == original.features.values());
        CHECK(back.truth.labels() == original.truth.labels());
        CHECK(back.k_truth == original.k_truth);
    }
}

TEST_CASE("PubMed tab layout") {
    TempDir dir;
    const auto nodes = dir.write("toy.NODE.paper.tab",
                                 "NODE\tpaper\n"
                                 "cat=1,2,3:label\tnumeric:w-a:0.0\tnumeric:w-b:0.0\tnumeric:w-c:0.0\n"
                                 "11\tlabel=1\tw-a=0.5\tw-c=0.25\tsummary=w-a,w-c\n"
                                 "22\tlabel=3\tw-b=0.1\tsummary=w-b\n"
                                 "33\tlabel=1\tsummary=\n");
    const auto cites = dir.write("toy.DIRECTED.cites.tab",
                                 "DIRECTED\tcites\n"
                                 "NO_FEATURES\n"
                                 "1\tpaper:11\t|\tpaper:22\n"
                                 "2\tpaper:33\t|\tpaper:11\n"
                                 "3\tpaper:44\t|\tpaper:11\n");
    const auto b = load_pubmed_tab(nodes, cites);
    CHECK(b.graph.num_nodes() == 3);
    CHECK(b.features.dim() == 3);
    CHECK(b.k_truth == 2);
    CHECK(b.truth.labels() == std::vector<Index>{0, 1, 0});
    CHECK(b.features.values()(0, 0) == 0.5);
    CHECK(b.features.values()(0, 2) == 0.25);
    CHECK(b.features.values()(1, 1) == 0.1);
    CHECK(b.graph.num_undirected_edges() == 2);
    CHECK(b.dropped_edges == 1);

    const auto bad = dir.write("bad.NODE.paper.tab", "NODE\tpaper\nnumeric:w-a:0.0\n11\tlabel=1\tw-z=1\n");
    CHECK_THROWS_AS(load_pubmed_tab(bad, cites), ParseError);
}

TEST_CASE("row_normalize") {
    Matrix x(3, 2);
    x << 2, 2, 0, 0, 1, 3;
    const Matrix y = row_normalize(FeatureMatrix(x)).values();
    Matrix expected(3, 2);
    expected << 0.5, 0.5, 0, 0, 0.25, 0.75;
    CHECK(y == expected);
}

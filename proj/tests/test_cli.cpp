#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "heurlink/data.hpp"
#include "heurlink/model.hpp"

using namespace heurlink;

namespace {

std::string tmp_path(const std::string& name) {
    return std::string(HEURLINK_TEST_TMP) + "/" + name;
}

// Runs the installed binary, captures combined output, returns the exit code.
int run_cli(const std::string& args, const std::string& tag) {
    const std::string cmd = std::string(HEURLINK_CLI_PATH) + " " + args + " > " +
                            tmp_path("cli_" + tag + ".log") + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

std::string write_file(const std::string& name, const std::string& content) {
    const std::string path = tmp_path(name);
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
    return path;
}

}  // namespace

TEST_CASE("synth emits an edge list the loader accepts") {
    const std::string out = tmp_path("cli_tri.txt");
    REQUIRE(run_cli("synth --kind triangular --size 5 --seed 3 --out " + out, "synth") == 0);
    const Dataset ds = load_dataset(out);
    CHECK(ds.graph.num_nodes == 15);
    CHECK(ds.graph.num_edges == 15);
    for (Index d : ds.graph.degrees_with_loops) CHECK(d == 3);

    CHECK(run_cli("synth --kind dodecahedral --size 5 --out " + tmp_path("cli_bad.txt"),
                  "synth_bad") == 1);
}

TEST_CASE("heuristic scoring verifies against its dense references") {
    const std::string graph = tmp_path("cli_hgraph.txt");
    REQUIRE(run_cli("synth --kind hexagonal --size 3 --seed 7 --out " + graph, "hsynth") == 0);

    const std::string scores = tmp_path("cli_cn.csv");
    REQUIRE(run_cli("heuristic --graph " + graph +
                        " --method cn --all-nonedges --verify --out " + scores,
                    "h_cn") == 0);
    const std::string body = read_file(scores);
    CHECK(body.rfind("i,j,score\n", 0) == 0);
    // 18 nodes, 18 edges: C(18,2) - 18 non-adjacent pairs, plus the header.
    CHECK(count_lines(body) == (18 * 17 / 2 - 18) + 1);

    const std::string pairs = write_file("cli_pairs.txt", "0 5\n3 11\n2 2\n");
    for (const char* method : {"rwr", "lrw", "ki", "katz", "glhn", "lpi", "ra", "ra_sq",
                               "ra_sym", "llhn"}) {
        const int rc = run_cli("heuristic --graph " + graph + " --method " + method +
                                   " --pairs " + pairs +
                                   " --verify --alpha 0.3 --gamma 0.2 --phi 0.2 --order 5",
                               std::string("h_") + method);
        INFO("method ", method);
        CHECK(rc == 0);
    }

    CHECK(run_cli("heuristic --graph " + graph + " --method adamic_adar --pairs " + pairs,
                  "h_unknown") == 1);
    CHECK(run_cli("heuristic --method cn --pairs " + pairs, "h_missing") == 1);
}

TEST_CASE("a zero-epoch run checkpoints the untouched initialization") {
    const std::string cfg = write_file("cli_zero_cfg.json", R"({
  "dataset": {"synthetic": {"kind": "triangular", "size": 6, "seed": 2}},
  "split": {"valid_ratio": 0.1, "test_ratio": 0.1, "seed": 4},
  "model": {"depth": 3, "use_node_embeddings": true, "embedding_dim": 6,
            "mlp_layers": 2, "mlp_hidden_dim": 4},
  "train": {"epochs": 50, "learning_rate": 0.01, "seed": 5}
})");
    const std::string ck = tmp_path("cli_zero_ck.json");
    const std::string hist = tmp_path("cli_zero_hist.csv");
    const std::string split_path = tmp_path("cli_zero_split.json");
    REQUIRE(run_cli("train --config " + cfg + " --epochs 0 --out-checkpoint " + ck +
                        " --history " + hist + " --out-split " + split_path + " --threads 1",
                    "train_zero") == 0);
    CHECK(count_lines(read_file(hist)) == 1);  // header only

    const ModelParams got = load_checkpoint(ck);
    const EdgeSplit split = load_split(split_path, got.num_nodes);
    const SparseGraph tg = build_graph(split.train, got.num_nodes);
    const ModelParams want = init_params(got.cfg, tg, 5);
    CHECK(got.betas == want.betas);
    CHECK(got.alpha_logits.values == want.alpha_logits.values);
    CHECK(got.embeddings.values == want.embeddings.values);
    REQUIRE(got.mlp.size() == want.mlp.size());
    for (std::size_t k = 0; k < got.mlp.size(); ++k) {
        CHECK(got.mlp[k].w.values == want.mlp[k].w.values);
        CHECK(got.mlp[k].b == want.mlp[k].b);
    }
}

TEST_CASE("heuristic CSV reports the triangle overlap count") {
    const std::string graph = write_file("cli_tri3.txt", "0 1\n1 2\n0 2\n");
    const std::string pairs = write_file("cli_tri3_pairs.txt", "0 1\n");
    const std::string out = tmp_path("cli_tri3.csv");
    REQUIRE(run_cli("heuristic --graph " + graph + " --method cn --pairs " + pairs + " --out " +
                        out,
                    "h_tri3") == 0);
    CHECK(read_file(out) == "i,j,score\n0,1,3\n");
}

TEST_CASE("train, eval, and recover round-trip through their file formats") {
    const std::string cfg = write_file("cli_train_cfg.json", R"({
  "dataset": {"synthetic": {"kind": "triangular", "size": 8, "seed": 2}},
  "split": {"valid_ratio": 0.1, "test_ratio": 0.1, "seed": 4},
  "model": {"depth": 3, "use_node_embeddings": true, "embedding_dim": 6,
            "mlp_layers": 2, "mlp_hidden_dim": 4, "loss": "bce"},
  "train": {"epochs": 3, "learning_rate": 0.01, "seed": 5},
  "eval": {"metric": "auc"}
})");
    const std::string ck = tmp_path("cli_ck.json");
    const std::string hist = tmp_path("cli_hist.csv");
    const std::string split = tmp_path("cli_split.json");

    REQUIRE(run_cli("train --config " + cfg + " --out-checkpoint " + ck + " --history " + hist +
                        " --out-split " + split + " --threads 1",
                    "train") == 0);
    const std::string hbody = read_file(hist);
    CHECK(hbody.rfind("epoch,loss,val_metric\n", 0) == 0);
    CHECK(count_lines(hbody) == 4);  // header plus one row per epoch

    const std::string report = tmp_path("cli_report.json");
    REQUIRE(run_cli("eval --checkpoint " + ck + " --split " + split + " --metric auc --out " +
                        report,
                    "eval") == 0);
    const auto rj = nlohmann::json::parse(read_file(report));
    CHECK(rj.at("metric").get<std::string>() == "auc");
    CHECK(rj.at("value").get<double>() >= 0.0);
    CHECK(rj.at("value").get<double>() <= 1.0);
    CHECK(rj.at("n_pos").get<Index>() == 2);

    const std::string interp = tmp_path("cli_interp.json");
    REQUIRE(run_cli("recover --checkpoint " + ck + " --split " + split + " --dense --out " +
                        interp,
                    "recover") == 0);
    const auto ij = nlohmann::json::parse(read_file(interp));
    CHECK(ij.at("betas").size() == 4);
    CHECK(ij.at("layers").size() == 3);
    CHECK(ij.contains("dense_h"));

    SUBCASE("a tampered split is rejected as a verification failure") {
        auto sj = nlohmann::json::parse(read_file(split));
        sj["test_pos"].push_back(sj["train"][0]);  // duplicate positive
        write_file("cli_split_bad.json", sj.dump(2));
        CHECK(run_cli("eval --checkpoint " + ck + " --split " + tmp_path("cli_split_bad.json") +
                          " --metric auc",
                      "eval_tampered") == 2);
    }
    SUBCASE("config files with unknown keys are refused") {
        const std::string bad = write_file("cli_bad_cfg.json", R"({
  "dataset": {"synthetic": {"kind": "triangular", "size": 4}},
  "optimiser": {"lr": 1}
})");
        CHECK(run_cli("train --config " + bad, "train_badkey") == 1);
    }
    SUBCASE("a missing config file is a usage error") {
        CHECK(run_cli("train --config " + tmp_path("cli_nonexistent.json"), "train_missing") ==
              1);
    }
}

TEST_CASE("an edge-list dataset config trains end to end") {
    const std::string graph = write_file("cli_edges.txt",
                                         "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n"
                                         "6 7\n7 8\n6 8\n9 10\n10 11\n9 11\n");
    const std::string cfg = write_file("cli_edges_cfg.json", R"({
  "dataset": {"edges": ")" + graph + R"("},
  "split": {"valid_ratio": 0.1, "test_ratio": 0.1, "seed": 4},
  "model": {"depth": 2, "use_node_embeddings": true, "embedding_dim": 4,
            "mlp_layers": 2, "mlp_hidden_dim": 4},
  "train": {"epochs": 1, "learning_rate": 0.01, "seed": 5}
})");
    const std::string hist = tmp_path("cli_edges_hist.csv");
    REQUIRE(run_cli("train --config " + cfg + " --history " + hist + " --threads 1",
                    "train_edges") == 0);
    CHECK(count_lines(read_file(hist)) == 2);  // header plus the single epoch

    SUBCASE("a dataset with neither edges nor synthetic is refused") {
        const std::string bad = write_file("cli_edges_bad.json", R"({
  "dataset": {},
  "train": {"epochs": 1}
})");
        CHECK(run_cli("train --config " + bad, "train_nodataset") == 1);
    }
}

TEST_CASE("gradcheck accepts healthy gradients") {
    CHECK(run_cli("gradcheck --seeds 1 --nodes 12 --depth 2 --input-dim 3 --hidden 4 "
                  "--embedding 3 --mlp-hidden 4 --loss bce",
                  "gradcheck") == 0);
}

TEST_CASE("bench writes a scaling table") {
    const std::string out = tmp_path("cli_bench.csv");
    REQUIRE(run_cli("bench --nodes 300 --depths 2,4 --degrees 4 --dims 8 --base-depth 2 "
                    "--base-degree 4 --base-dim 8 --repeats 1 --out " +
                        out,
                    "bench") == 0);
    const std::string body = read_file(out);
    CHECK(body.rfind("axis,value,seconds\n", 0) == 0);
    CHECK(count_lines(body) == 5);  // header + 2 depth rows + 1 degree + 1 dim
    CHECK(body.find("depth,") != std::string::npos);
    CHECK(body.find("edges,") != std::string::npos);
    CHECK(body.find("feature_dim,") != std::string::npos);
}

TEST_CASE("running without a subcommand is a usage error") {
    CHECK(run_cli("", "nosub") == 1);
}

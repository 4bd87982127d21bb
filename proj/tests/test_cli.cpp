#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "speckle/io.hpp"
#include "speckle/phantom.hpp"

namespace fs = std::filesystem;
using namespace speckle;

namespace {

class Workdir {
public:
    Workdir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("speckle_cli_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~Workdir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

int run(const std::string& args) {
    const std::string cmd = std::string(SPECKLE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

const std::string kSmallMc = "--situations 0,1 --filters lee,mapg0 --replications 5 --seed 4242";

}  // namespace

TEST_CASE("phantom is deterministic and round-trips") {
    Workdir dir;
    REQUIRE(run("phantom -o " + q(dir / "a.fimg") + " --pgm " + q(dir / "a.pgm")) == 0);
    REQUIRE(run("phantom -o " + q(dir / "b.fimg")) == 0);
    CHECK(slurp(dir / "a.fimg") == slurp(dir / "b.fimg"));
    CHECK(read_fimg(dir / "a.fimg") == build_phantom(PhantomLayout::canonical()));
    const KeyValues prov = KeyValues::read(dir / "a.fimg.prov");
    CHECK(prov.get("output_fnv1a") == hex64(file_digest(dir / "a.fimg")));
    CHECK(prov.contains("pgm_low"));
    CHECK(fs::exists(dir / "a.pgm"));
}

TEST_CASE("invalid layouts and arguments are validation errors") {
    Workdir dir;
    {
        std::ofstream out(dir / "overlap.txt");
        out << "strip_columns = 20,21,48,65,84,105,128\n";
    }
    CHECK(run("phantom --layout " + q(dir / "overlap.txt") + " -o " + q(dir / "x.fimg")) == 2);
    CHECK_FALSE(fs::exists(dir / "x.fimg"));
    CHECK(run("phantom -o " + q(dir / "x.fimg") + " --no-such-flag") == 2);
    CHECK(run("corrupt --situation 7 --seed 1 -o " + q(dir / "x.fimg")) == 2);
    CHECK(run("corrupt --situation 1 --seed 1 --looks 0.5 -o " + q(dir / "x.fimg")) == 2);
    REQUIRE(run("phantom -o " + q(dir / "p.fimg")) == 0);
    CHECK(run("filter -i " + q(dir / "p.fimg") + " -o " + q(dir / "f.fimg") + " --window 4") == 2);
    CHECK(run("filter -i " + q(dir / "p.fimg") + " -o " + q(dir / "f.fimg") + " --method median") ==
          2);
    CHECK(run("filter -i " + q(dir / "missing.fimg") + " -o " + q(dir / "f.fimg")) == 2);
}

TEST_CASE("unreadable image is a runtime error") {
    Workdir dir;
    {
        std::ofstream out(dir / "junk.fimg");
        out << "not an image";
    }
    CHECK(run("filter -i " + q(dir / "junk.fimg") + " -o " + q(dir / "f.fimg")) != 0);
}

TEST_CASE("corrupt is deterministic and its sidecar reproduces it") {
    Workdir dir;
    REQUIRE(run("corrupt --situation 3 --seed 42 -o " + q(dir / "a.fimg")) == 0);
    REQUIRE(run("corrupt --situation 3 --seed 42 -o " + q(dir / "b.fimg")) == 0);
    CHECK(slurp(dir / "a.fimg") == slurp(dir / "b.fimg"));

    const KeyValues prov = KeyValues::read(dir / "a.fimg.prov");
    REQUIRE(run("corrupt --situation " + prov.get("situation") + " --seed " + prov.get("seed") +
                " --looks " + prov.get("looks") + " -o " + q(dir / "c.fimg")) == 0);
    CHECK(hex64(file_digest(dir / "c.fimg")) == prov.get("output_fnv1a"));

    REQUIRE(run("corrupt --situation 3 --seed 43 -o " + q(dir / "d.fimg")) == 0);
    CHECK(slurp(dir / "a.fimg") != slurp(dir / "d.fimg"));
}

TEST_CASE("MAP G0 filter output on the situation 0 fixture is frozen") {
    Workdir dir;
    REQUIRE(run("corrupt --situation 0 --seed 42 -o " + q(dir / "c.fimg")) == 0);
    REQUIRE(run("filter -i " + q(dir / "c.fimg") + " -o " + q(dir / "f.fimg") +
                " --method mapg0 --window 7") == 0);
    CHECK(hex64(file_digest(dir / "c.fimg")) == "46495fc41ca9d432");
    CHECK(hex64(file_digest(dir / "f.fimg")) == "69506898f7b6d319");
    const KeyValues prov = KeyValues::read(dir / "f.fimg.prov");
    CHECK(prov.get("method") == "mapg0");
    CHECK(prov.get("input_fnv1a") == "46495fc41ca9d432");
}

TEST_CASE("assess of the truth against itself") {
    Workdir dir;
    REQUIRE(run("corrupt --situation 2 --seed 5 -o " + q(dir / "c.fimg") + " --truth " +
                q(dir / "t.fimg")) == 0);
    REQUIRE(run("assess -i " + q(dir / "t.fimg") + " --truth " + q(dir / "t.fimg") + " -o " +
                q(dir / "a.csv")) == 0);
    std::istringstream csv(slurp(dir / "a.csv"));
    std::string header;
    std::string row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == "enl,line_pres,edge_gradient,edge_variance");
    const auto fields = parse_csv_record(row);
    REQUIRE(fields.size() == 4);
    CHECK(parse_real(fields[1], "line_pres") == 0.0);
    CHECK(parse_real(fields[3], "edge_variance") == 0.0);
}

TEST_CASE("mc output is independent of the thread count") {
    Workdir dir;
    REQUIRE(run("mc " + kSmallMc + " --threads 1 -o " + q(dir / "one.csv")) == 0);
    REQUIRE(run("mc " + kSmallMc + " --threads 8 -o " + q(dir / "eight.csv")) == 0);
    const std::string one = slurp(dir / "one.csv");
    CHECK(one == slurp(dir / "eight.csv"));
    CHECK(count_lines(one) == 1 + 2 * 2 * 5);
    CHECK(one.rfind("situation,filter,replication,seed,enl,line_pres,edge_gradient,edge_variance\n",
                    0) == 0);

    const std::string summary = slurp(dir / "one_summary.csv");
    CHECK(count_lines(summary) == 1 + 2 * 2 * 4);
    CHECK(summary == slurp(dir / "eight_summary.csv"));
    for (const char* m : {"enl", "line_pres", "edge_gradient", "edge_variance"}) {
        const std::string svg = slurp(dir / ("one_" + std::string(m) + ".svg"));
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find(">G1<") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(dir / "one.csv.partial"));

    // the report command rebuilds the same summary from the results alone
    fs::copy_file(dir / "one.csv", dir / "again.csv");
    REQUIRE(run("report " + q(dir / "again.csv")) == 0);
    CHECK(slurp(dir / "again_summary.csv") == summary);
}

TEST_CASE("mc resumes an interrupted run") {
    Workdir dir;
    REQUIRE(run("mc " + kSmallMc + " -o " + q(dir / "full.csv")) == 0);

    const fs::path out = dir / "cut.csv";
    CHECK(run("mc " + kSmallMc + " --threads 2 --abort-after 4 -o " + q(out)) == 1);
    const fs::path partial = fs::path(out.string() + ".partial");
    REQUIRE(fs::exists(partial));
    CHECK_FALSE(fs::exists(out));

    // simulate a write cut short in the middle of a row
    const std::string text = slurp(partial);
    REQUIRE(text.size() > 20);
    {
        std::ofstream trunc(partial, std::ios::binary | std::ios::trunc);
        trunc << text.substr(0, text.size() - 7);
    }

    CHECK(run("mc " + kSmallMc + " -o " + q(out)) == 2);
    CHECK(run("mc " + kSmallMc + " --replications 6 --resume -o " + q(out)) == 2);
    REQUIRE(run("mc " + kSmallMc + " --resume -o " + q(out)) == 0);
    CHECK(slurp(out) == slurp(dir / "full.csv"));
    CHECK(slurp(dir / "cut_summary.csv") == slurp(dir / "full_summary.csv"));
    CHECK_FALSE(fs::exists(partial));
    const KeyValues prov = KeyValues::read(fs::path(out.string() + ".prov"));
    CHECK(prov.get("master_seed") == "4242");
    CHECK(slurp(fs::path(out.string() + ".prov")).find("# resumed_cells=") != std::string::npos);
}

TEST_CASE("mc spec files") {
    Workdir dir;
    {
        std::ofstream spec(dir / "spec.txt");
        spec << "situations = 2\nfilters = lee\nreplications = 2\nmaster_seed = 7\n";
    }
    REQUIRE(run("mc --spec " + q(dir / "spec.txt") + " -o " + q(dir / "r.csv")) == 0);
    CHECK(count_lines(slurp(dir / "r.csv")) == 3);
    // fewer than five replications: results only, no summaries
    CHECK_FALSE(fs::exists(dir / "r_summary.csv"));

    // the provenance sidecar is itself a usable spec
    REQUIRE(run("mc --spec " + q(dir / "r.csv.prov") + " -o " + q(dir / "t.csv")) == 0);
    CHECK(slurp(dir / "t.csv") == slurp(dir / "r.csv"));

    {
        std::ofstream spec(dir / "bad.txt");
        spec << "situations = 2,9\nwindow = 6\n";
    }
    CHECK(run("mc --spec " + q(dir / "bad.txt") + " -o " + q(dir / "u.csv")) == 2);
}

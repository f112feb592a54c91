#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "porofem/cli.hpp"
#include "porofem/porofem.hpp"

using namespace porofem;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("porofem_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(POROFEM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Vtk, Structure)
{
    const Mesh m = unit_square_mesh(2);
    State s = State::zero(DofLayout(m, false), 0.5);
    s.p.setLinSpaced(m.num_cells(), 0.0, 1.0);
    std::ostringstream os;
    write_vtk(m, s, os);
    const std::string out = os.str();
    EXPECT_NE(out.find("# vtk DataFile Version 3.0"), std::string::npos);
    EXPECT_NE(out.find("POINTS 9 double"), std::string::npos);
    EXPECT_NE(out.find("CELLS 8 32"), std::string::npos);
    EXPECT_NE(out.find("CELL_TYPES 8"), std::string::npos);
    EXPECT_NE(out.find("VECTORS u double"), std::string::npos);
    EXPECT_NE(out.find("VECTORS z double"), std::string::npos);
    EXPECT_NE(out.find("SCALARS p double 1"), std::string::npos);
    EXPECT_THROW(write_vtk(m, State::zero(DofLayout(unit_square_mesh(3), false)), os), InvalidArgument);
}

TEST(Vtk, TetrahedraCellType)
{
    const Mesh m = unit_cube_mesh(1);
    std::ostringstream os;
    write_vtk(m, State::zero(DofLayout(m, false)), os);
    EXPECT_NE(os.str().find("CELLS 6 30"), std::string::npos);
    EXPECT_NE(os.str().find("\n10\n"), std::string::npos);
}

TEST(Csv, RoundTrip)
{
    CsvTable t;
    t.header = {"a", "b", "c"};
    t.rows = {{"1", "2.5", ""}, {"inf", "-3", "nan"}};
    std::stringstream ss;
    write_csv(t, ss);
    const CsvTable r = read_csv(ss);
    EXPECT_EQ(r.header, t.header);
    EXPECT_EQ(r.rows, t.rows);
    EXPECT_EQ(r.number(0, "b"), 2.5);
    EXPECT_TRUE(std::isnan(r.number(0, "c")));
    EXPECT_TRUE(std::isinf(r.number(1, "a")));
    EXPECT_THROW((void)r.number(0, "missing"), InvalidArgument);
}

TEST(Csv, Errors)
{
    std::istringstream ragged("a,b\n1,2\n3\n");
    try {
        (void)read_csv(ragged);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream empty("\n\n");
    EXPECT_THROW((void)read_csv(empty), ParseError);
    std::istringstream bad("x\n1.5abc\n");
    EXPECT_THROW((void)read_csv(bad).number(0, "x"), ParseError);
    CsvTable t;
    t.header = {"a"};
    t.rows = {{"1", "2"}};
    std::ostringstream os;
    EXPECT_THROW(write_csv(t, os), InvalidArgument);
}

TEST(Csv, ConvergenceTable)
{
    ConvergenceTable table;
    table.rows.push_back({0.5, 0.125, {1, 1, 1, 1, 1}, 0.2});
    table.rows.push_back({0.25, 0.0625, {0.5, 0.25, 0.5, 0.5, 0.5}, 0.1});
    const CsvTable csv = convergence_csv(table);
    ASSERT_EQ(csv.header.size(), 2u + 5u + 1u + 5u);
    EXPECT_EQ(csv.header[2], "err_u_H1");
    EXPECT_EQ(csv.header[7], "osc");
    EXPECT_EQ(csv.header[8], "rate_u_H1");
    EXPECT_EQ(csv.rows[0][8], "");
    EXPECT_NEAR(csv.number(1, "rate_u_H1"), 1.0, 1e-15);
    EXPECT_NEAR(csv.number(1, "rate_z_L2"), 2.0, 1e-15);
    EXPECT_EQ(csv.number(0, "h"), 0.5);
}

TEST(Config, ParsesSectionsAndValues)
{
    std::istringstream is("top = 1\n# comment\n[material]\nE = 1e5 # trailing\nkappa = 1, 0, 0, 2\n\n[bc.3]\nflux = 0\n");
    const Config c = Config::parse(is);
    EXPECT_EQ(c.number("", "top"), 1.0);
    EXPECT_EQ(c.number("material", "E"), 1e5);
    EXPECT_EQ(c.numbers("material", "kappa"), (std::vector<double>{1, 0, 0, 2}));
    EXPECT_EQ(c.sections(), (std::vector<std::string>{"material", "bc.3"}));
    EXPECT_EQ(c.line_of("bc.3", "flux"), 8u);
    EXPECT_EQ(c.number_or("material", "nu", 0.3), 0.3);
    EXPECT_EQ(c.string_or("x", "y", "z"), "z");
    EXPECT_THROW((void)c.number("material", "nu"), InvalidArgument);
}

TEST(Config, ErrorsCarryLineNumbers)
{
    const auto line_of_error = [](const std::string& text) -> std::size_t {
        std::istringstream is(text);
        try {
            const Config c = Config::parse(is);
            (void)c.number("s", "k");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of_error("[s]\nk = 1\nk = 2\n"), 3u);
    EXPECT_EQ(line_of_error("[s\n"), 1u);
    EXPECT_EQ(line_of_error("[s]\n\njunk\n"), 3u);
    EXPECT_EQ(line_of_error("[s]\n = 4\n"), 2u);
    EXPECT_EQ(line_of_error("[]\n"), 1u);
    EXPECT_EQ(line_of_error("[s]\nk = abc\n"), 2u);
}

TEST(Config, ProblemFromMeshFile)
{
    const fs::path dir = scratch_dir("config");
    write_mesh(unit_square_mesh(4), (dir / "square.mesh").string());
    std::ofstream(dir / "run.cfg") << "[problem]\nmesh = square.mesh\n"
                                      "[material]\nlambda = 2\nmu_s = 1\nkappa = 0.5\ndelta = 0.1\n"
                                      "[time]\ndt = 0.05\nT = 0.1\n"
                                      "[source]\ng = 1\n"
                                      "[bc.1]\ndisplacement = 0 0\npressure = 0\n"
                                      "[bc.2]\ntraction = 0 -1\nflux = 0\n"
                                      "[bc.3]\ndisplacement = 0 0\ncomponents = 0 1\nflux = 0\n"
                                      "[bc.4]\ntraction = 0 0\nflux = 0\n";
    const ProblemDefinition p = cli::problem_from_config(Config::parse_file((dir / "run.cfg").string()), dir.string());
    EXPECT_EQ(p.mesh.num_cells(), 32);
    EXPECT_EQ(p.params.lambda, 2.0);
    EXPECT_EQ(p.params.kappa(1, 1), 0.5);
    EXPECT_EQ(p.params.delta, 0.1);
    EXPECT_EQ(p.num_steps(), 2);
    EXPECT_EQ(p.boundary.size(), 4u);
    EXPECT_FALSE(p.pressure_mean_constraint);
    EXPECT_EQ(cli::cmd_run((dir / "run.cfg").string(), {.out = dir.string()}, std::cout), cli::ok);
    const CsvTable summary = read_csv((dir / "square_summary.csv").string());
    EXPECT_EQ(summary.rows.size(), 3u);
    EXPECT_TRUE(fs::exists(dir / "square_final.vtk"));
    fs::remove_all(dir);
}

TEST(Config, ProblemErrors)
{
    const auto build = [](const std::string& text) {
        std::istringstream is(text);
        return cli::problem_from_config(Config::parse(is));
    };
    EXPECT_THROW((void)build("[problem]\n"), InvalidArgument);
    EXPECT_THROW((void)build("[problem]\nbenchmark = nope\n"), ParseError);
    EXPECT_THROW((void)build("[problem]\nbenchmark = manufactured_2d\n[material]\noperator = odd\n"), ParseError);
    EXPECT_THROW((void)build("[problem]\nbenchmark = manufactured_2d\n[material]\nkappa = 1 2 3\n"), ParseError);
    EXPECT_THROW((void)build("[problem]\nbenchmark = manufactured_2d\n[time]\ndt = 0.3\n"), InvalidArgument);
    const ProblemDefinition p = build("[problem]\nbenchmark = manufactured_2d\nresolution = 4\n");
    EXPECT_EQ(p.mesh.num_cells(), 32);
}

TEST(Cli, ExitCodeMapping)
{
    EXPECT_EQ(cli::exit_code_for(InvalidArgument("x")), cli::invalid_arguments);
    EXPECT_EQ(cli::exit_code_for(ParseError("x", 1)), cli::invalid_arguments);
    EXPECT_EQ(cli::exit_code_for(SolverError("x", 2)), cli::solver_failure);
    EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), cli::failure);
}

TEST(Cli, RunConfigValidation)
{
    cli::RunConfig c;
    EXPECT_NO_THROW(c.validate());
    c.resolutions = {0};
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.dt = -1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.deltas = {-0.1};
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Cli, ArmstrongCurve)
{
    const fs::path dir = scratch_dir("armstrong");
    cli::RunConfig c;
    c.out = dir.string();
    c.dt = 0.5;
    c.T = 2.0;
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_armstrong(c, log), cli::ok);
    const CsvTable t = read_csv((dir / "armstrong.csv").string());
    ASSERT_EQ(t.rows.size(), 5u);
    EXPECT_NEAR(t.number(0, "u_over_a"), 0.005, 1e-5);
    EXPECT_NEAR(t.number(4, "u_over_a"), 0.0015, 1e-6);
    fs::remove_all(dir);
}

TEST(CliBinary, ExitCodes)
{
    const fs::path dir = scratch_dir("binary");
    const std::string out = " --out " + dir.string();
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("bogus"), 2);
    EXPECT_EQ(run_cli("converge2d --res 0,4" + out), 2);
    EXPECT_EQ(run_cli("converge2d --res 4" + out), 2);
    EXPECT_EQ(run_cli("run " + (dir / "missing.cfg").string() + out), 2);
    EXPECT_EQ(run_cli("converge2d --res 4,8 --delta 1 --threshold 0.5" + out), 0);
    EXPECT_TRUE(fs::exists(dir / "converge2d_delta1.csv"));
    EXPECT_EQ(run_cli("converge2d --res 4,8 --delta 1 --threshold 5" + out), 4);
    EXPECT_EQ(run_cli("converge2d --res 4,8 --delta 0" + out), 3);
    EXPECT_EQ(run_cli("armstrong --dt 1 --T 2" + out), 0);
    EXPECT_NE(slurp(dir / "armstrong.csv").find("t,t_over_tg,u_over_a"), std::string::npos);
    EXPECT_EQ(run_cli("cantilever --res 4 --dt 0.001 --T 0.002 --delta 0,1e-3 --threshold 10" + out), 0);
    EXPECT_TRUE(fs::exists(dir / "cantilever_report.csv"));
    fs::remove_all(dir);
}

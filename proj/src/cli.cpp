#include "flowlet/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "flowlet/check.hpp"
#include "flowlet/interp.hpp"
#include "flowlet/naive.hpp"
#include "flowlet/parse.hpp"
#include "flowlet/rename.hpp"
#include "flowlet/server.hpp"

namespace flowlet {

namespace {

int default_workers() {
  if (const char *env = std::getenv("FLOWLET_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::optional<std::string> slurp(const std::string &path, std::ostream &err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "cannot read " << path << "\n";
    return std::nullopt;
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int check_command(const std::string &root, const CheckOptions &opts, bool pretty,
                  std::ostream &out) {
  RealFileSystem fs;
  BatchResult r = check_root(fs, root, opts);
  out << batch_json(r, pretty) << "\n";
  return r.errors.empty() ? 0 : 1;
}

int eval_command(const std::string &file, uint64_t fuel, std::ostream &out,
                 std::ostream &err) {
  auto src = slurp(file, err);
  if (!src) return 2;
  ParseResult pr = parse(*src, file);
  if (!pr.ok()) {
    err << file << ":" << span_str(pr.error->span) << ": parse error: "
        << pr.error->message << "\n";
    return 1;
  }
  RenameResult rr = alpha_rename(*pr.program);
  if (!rr.errors.empty()) {
    for (const auto &ub : rr.errors)
      err << file << ":" << span_str(ub.span) << ": unbound variable '" << ub.ident.text
          << "'\n";
    return 1;
  }
  interp::MachinePtr m = interp::load(*pr.program);
  uint64_t steps = 0;
  while (steps < fuel && interp::step(*m)) steps++;
  interp::Outcome o = interp::halted(*m) ? interp::outcome(*m)
                                         : interp::Outcome{interp::Outcome::Tag::OutOfFuel,
                                                           interp::UndefV{},
                                                           interp::StuckKind::NotAFunction,
                                                           {},
                                                           ""};
  out << interp::outcome_str(*m, o) << "\n";
  return o.tag == interp::Outcome::Tag::Stuck ? 1 : 0;
}

UnitCheck unit_for(const std::string &file, bool refinements, std::ostream &err,
                   int &status) {
  status = 0;
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    err << "cannot read " << file << "\n";
    status = 2;
    return {};
  }
  std::ostringstream os;
  os << in.rdbuf();
  UnitCheck u = check_source(os.str(), file, refinements);
  if (!u.parse_ok) {
    for (const auto &e : u.errors)
      err << file << ":" << span_str(e.span) << ": " << e.message << "\n";
    status = 1;
  }
  return u;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"flowlet - a flow-sensitive checker for .fc modules"};
  app.require_subcommand(1);

  CheckOptions opts;
  opts.workers = default_workers();
  bool pretty = false;
  bool no_refinements = false;
  uint64_t fuel = 10000;

  app.add_option("--workers", opts.workers, "worker count");
  app.add_option("--bucket", opts.bucket, "scheduler bucket size");
  app.add_flag("--no-refinements", no_refinements, "disable refinement tracking");
  app.add_option("--fuel", fuel, "interpreter step budget");
  app.add_flag("--pretty", pretty, "human-readable JSON");

  std::string root = ".";
  std::string file;
  std::vector<std::string> changesets;
  bool server_status = false;

  CLI::App *check = app.add_subcommand("check", "check every .fc file under a root");
  check->add_option("root", root, "directory to check");

  CLI::App *server = app.add_subcommand("server", "long-lived state over a root");
  server->add_option("root", root, "directory to serve");
  server->add_option("--apply", changesets, "changeset JSON file(s), applied in order");
  server->add_flag("--status", server_status, "print status JSON");

  CLI::App *eval = app.add_subcommand("eval", "run a program");
  eval->add_option("file", file, "program to run")->required();

  CLI::App *dump_ast = app.add_subcommand("dump-ast", "canonical AST JSON");
  dump_ast->add_option("file", file, "source file")->required();

  CLI::App *dump_cons = app.add_subcommand("dump-constraints", "generated constraints");
  dump_cons->add_option("file", file, "source file")->required();

  CLI::App *dump_graph = app.add_subcommand("dump-graph", "closed constraint graph, DOT");
  dump_graph->add_option("file", file, "source file")->required();

  CLI::App *dump_sig = app.add_subcommand("dump-signature", "module signature");
  dump_sig->add_option("file", file, "source file")->required();

  for (CLI::App *sc : app.get_subcommands(nullptr)) sc->fallthrough();

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 2;
  }

  opts.refinements = !no_refinements;
  if (opts.workers < 1) opts.workers = 1;

  try {
    if (check->parsed()) return check_command(root, opts, pretty, out);

    if (server->parsed()) {
      RealFileSystem fs;
      Server srv(fs, root, opts);
      srv.init();
      for (const auto &cs : changesets) {
        auto bytes = slurp(cs, err);
        if (!bytes) return 2;
        ChangeSet ch = changeset_from_json(*bytes);
        Server::ApplyResult r = srv.apply_changes(ch);
        nlohmann::ordered_json j;
        j["rechecked"] = r.rechecked;
        out << j.dump() << "\n";
      }
      if (server_status || changesets.empty()) out << srv.status_json(pretty) << "\n";
      return srv.all_errors().empty() ? 0 : 1;
    }

    if (eval->parsed()) return eval_command(file, fuel, out, err);

    if (dump_ast->parsed()) {
      int status;
      UnitCheck u = unit_for(file, opts.refinements, err, status);
      if (status) return status;
      out << ast::dump_json(*u.program, pretty) << "\n";
      return 0;
    }
    if (dump_cons->parsed()) {
      int status;
      UnitCheck u = unit_for(file, opts.refinements, err, status);
      if (status) return status;
      for (const auto &c : u.gen_log) out << constraint_str(c) << "\n";
      return 0;
    }
    if (dump_graph->parsed()) {
      int status;
      UnitCheck u = unit_for(file, opts.refinements, err, status);
      if (status) return status;
      out << u.graph->dump_dot();
      return 0;
    }
    if (dump_sig->parsed()) {
      int status;
      UnitCheck u = unit_for(file, opts.refinements, err, status);
      if (status) return status;
      ModuleSignature sig = u.export_type
                                ? extract_signature(*u.graph, u.export_type, file, {})
                                : void_signature();
      out << sig.serialized;
      out << "hash " << std::hex << sig.hash << std::dec << "\n";
      return 0;
    }
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  err << "no subcommand\n";
  return 2;
}

} // namespace flowlet

// oodcl command-line tool. Talks to the shared library exclusively through
// the C API in oodcl/oodcl.h.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oodcl/oodcl.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> extra_overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file")
      ->required();
  cmd->add_option("--seed", args.seed,
                  "override data.seed and train.seed together");
  cmd->add_option("--out", args.out_dir, "override out.dir");
}

std::vector<std::string> build_overrides(const CommonArgs& args) {
  std::vector<std::string> ov = args.extra_overrides;
  if (!args.seed.empty()) {
    ov.push_back("data.seed=" + args.seed);
    ov.push_back("train.seed=" + args.seed);
  }
  if (!args.out_dir.empty()) ov.push_back("out.dir=" + args.out_dir);
  return ov;
}

int fail(oodcl_status status) {
  std::fprintf(stderr, "oodcl: error: %s\n", oodcl_last_error());
  return int(status);
}

class ConfigHandle {
 public:
  ~ConfigHandle() { oodcl_config_free(cfg_); }
  oodcl_status load(const CommonArgs& args) {
    const auto overrides = build_overrides(args);
    std::vector<const char*> raw;
    raw.reserve(overrides.size());
    for (const auto& s : overrides) raw.push_back(s.c_str());
    return oodcl_config_load(args.config_path.c_str(), raw.data(), raw.size(),
                             &cfg_);
  }
  const oodcl_config* get() const { return cfg_; }

 private:
  oodcl_config* cfg_ = nullptr;
};

void print_and_free(char* s) {
  if (s) {
    std::fputs(s, stdout);
    oodcl_string_free(s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OOD-aware prototypical supervised contrastive learning"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, compare_args;
  std::string variant, eval_checkpoint, eval_score, compare_score;
  std::vector<std::string> compare_variants;

  CLI::App* gen = app.add_subcommand("gen-data", "generate the dataset files");
  add_common(gen, gen_args);

  CLI::App* train = app.add_subcommand("train", "train one variant");
  add_common(train, train_args);
  train
      ->add_option("--variant", variant,
                   "psupcon|opsupcon-r|opsupcon-p|opsupcon-m|ce|energy")
      ->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")
      ->required();
  eval->add_option("--score", eval_score, "maxlogit|msp|energy");

  CLI::App* compare =
      app.add_subcommand("compare", "side-by-side table over variants");
  add_common(compare, compare_args);
  compare->add_option("--variant", compare_variants,
                      "variants to compare (repeatable)");
  compare->add_option("--score", compare_score, "maxlogit|msp|energy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (gen->parsed()) {
    ConfigHandle cfg;
    if (auto st = cfg.load(gen_args); st != OODCL_OK) return fail(st);
    char* summary = nullptr;
    if (auto st = oodcl_gen_data(cfg.get(), &summary); st != OODCL_OK) {
      return fail(st);
    }
    print_and_free(summary);
    return 0;
  }

  if (train->parsed()) {
    ConfigHandle cfg;
    if (auto st = cfg.load(train_args); st != OODCL_OK) return fail(st);
    char* summary = nullptr;
    if (auto st = oodcl_train(cfg.get(), variant.c_str(), &summary);
        st != OODCL_OK) {
      return fail(st);
    }
    print_and_free(summary);
    return 0;
  }

  if (eval->parsed()) {
    ConfigHandle cfg;
    if (auto st = cfg.load(eval_args); st != OODCL_OK) return fail(st);
    char* json = nullptr;
    char* path = nullptr;
    if (auto st = oodcl_eval(cfg.get(), eval_checkpoint.c_str(),
                             eval_score.empty() ? nullptr : eval_score.c_str(),
                             &json, &path);
        st != OODCL_OK) {
      return fail(st);
    }
    print_and_free(json);
    if (path) {
      std::fprintf(stdout, "report: %s\n", path);
      oodcl_string_free(path);
    }
    return 0;
  }

  if (compare->parsed()) {
    if (!compare_score.empty()) {
      compare_args.extra_overrides.push_back("eval.score=" + compare_score);
    }
    ConfigHandle cfg;
    if (auto st = cfg.load(compare_args); st != OODCL_OK) return fail(st);
    std::vector<const char*> raw;
    raw.reserve(compare_variants.size());
    for (const auto& v : compare_variants) raw.push_back(v.c_str());
    char* table = nullptr;
    char* json = nullptr;
    if (auto st =
            oodcl_compare(cfg.get(), raw.data(), raw.size(), &table, &json);
        st != OODCL_OK) {
      return fail(st);
    }
    print_and_free(table);
    oodcl_string_free(json);
    return 0;
  }

  return 2;
}

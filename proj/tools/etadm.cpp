// etadm: command-line front door for the dialogue manager.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "etadm/corpus.hpp"
#include "etadm/error.hpp"
#include "etadm/http_server.hpp"
#include "etadm/replay.hpp"
#include "etadm/service.hpp"
#include "etadm/text.hpp"
#include "etadm/trainer.hpp"

using namespace etadm;

namespace {

const std::string kData = ETADM_DATA_DIR;

struct Common {
  std::string rulebook = kData + "/restaurant_rulebook.json";
  std::string db = kData + "/restaurants.json";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--rulebook", c.rulebook, "Rulebook JSON")->capture_default_str();
  cmd->add_option("--db", c.db, "Restaurant database JSON")->capture_default_str();
}

struct EncoderOpts {
  std::string kind = "hashed";
  std::size_t dim = 768;
  std::string vectors;
};

void add_encoder(CLI::App* cmd, EncoderOpts& e) {
  cmd->add_option("--encoder", e.kind, "Context encoder")->check(CLI::IsMember({"hashed", "precomputed"}))
      ->capture_default_str();
  cmd->add_option("--dim", e.dim, "Context feature dimension")->capture_default_str();
  cmd->add_option("--vectors", e.vectors, "Precomputed vectors JSON (turn key -> array)");
}

ContextEncoderConfig encoder_config(const EncoderOpts& e) {
  ContextEncoderConfig c;
  c.dim = e.dim;
  if (e.kind == "precomputed") {
    if (e.vectors.empty()) throw Error(ErrorCode::InvalidArgument, "--encoder precomputed needs --vectors");
    c.kind = EncoderKind::Precomputed;
    c.vectors_path = e.vectors;
  }
  return c;
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad fraction '" + item + "'");
    }
  }
  return out;
}

TrainConfig train_config(const std::string& path, const Rulebook& rb) {
  TrainConfig c = path.empty() ? TrainConfig{} : parse_train_config(read_file(path));
  c.n_actions = rb.action_count();
  c.action_names = rb.action_names();
  return c;
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-trigger-action dialogue manager with a learned trigger"};
  app.require_subcommand(1);

  Common common;

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  add_common(serve, common);
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_model;
  std::string static_dir;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--model", serve_model, "Model file for model/hybrid sessions");
  serve->add_option("--static", static_dir, "Directory served at / (browser demo)");

  // generate
  auto* generate = app.add_subcommand("generate", "Synthesize an annotated corpus");
  add_common(generate, common);
  std::uint64_t gen_seed = 13;
  std::size_t gen_count = 200;
  std::string gen_out;
  generate->add_option("--seed", gen_seed)->capture_default_str();
  generate->add_option("--count", gen_count)->capture_default_str();
  generate->add_option("--out", gen_out)->required();

  // collect
  auto* collect = app.add_subcommand("collect", "Replay a corpus into mini-turn records");
  add_common(collect, common);
  EncoderOpts collect_enc;
  add_encoder(collect, collect_enc);
  std::string corpus_path;
  std::string records_out;
  collect->add_option("--corpus", corpus_path)->required();
  collect->add_option("--out", records_out)->required();

  // train
  auto* trainc = app.add_subcommand("train", "Train the model trigger");
  add_common(trainc, common);
  std::string records_path;
  std::string model_out;
  std::string config_path;
  std::string split_test_out;
  double holdout = 0.0;
  std::uint64_t split_seed = 13;
  trainc->add_option("--records", records_path)->required();
  trainc->add_option("--out", model_out)->required();
  trainc->add_option("--config", config_path, "Train config JSON");
  trainc->add_option("--holdout", holdout, "Share of dialogues held out (not trained on)")->capture_default_str();
  trainc->add_option("--split-seed", split_seed)->capture_default_str();
  trainc->add_option("--test-out", split_test_out, "Write held-out records here");

  // eval
  auto* evalc = app.add_subcommand("eval", "Mini-turn accuracy of a model on records");
  std::string eval_records;
  std::string eval_model;
  bool eval_json = false;
  evalc->add_option("--records", eval_records)->required();
  evalc->add_option("--model", eval_model)->required();
  evalc->add_flag("--json", eval_json);

  // fewshot
  auto* fewshot = app.add_subcommand("fewshot", "Few-shot learning curve");
  add_common(fewshot, common);
  EncoderOpts fs_enc;
  add_encoder(fewshot, fs_enc);
  std::string fs_corpus;
  std::string fs_fractions = "0.05,0.1,0.25,0.5,1.0";
  std::string fs_config;
  FewShotConfig fs_cfg;
  bool fs_json = false;
  fewshot->add_option("--corpus", fs_corpus)->required();
  fewshot->add_option("--fractions", fs_fractions)->capture_default_str();
  fewshot->add_option("--config", fs_config, "Train config JSON");
  fewshot->add_option("--test-fraction", fs_cfg.test_fraction)->capture_default_str();
  fewshot->add_option("--split-seed", fs_cfg.split_seed)->capture_default_str();
  fewshot->add_option("--subsample-seed", fs_cfg.subsample_seed)->capture_default_str();
  fewshot->add_flag("--json", fs_json);

  // replay
  auto* replay = app.add_subcommand("replay", "Run a corpus through live sessions and compare actions");
  add_common(replay, common);
  std::string rp_corpus;
  std::string rp_policy = "rules";
  std::string rp_model;
  bool rp_json = false;
  replay->add_option("--corpus", rp_corpus)->required();
  replay->add_option("--policy", rp_policy)->check(CLI::IsMember({"rules", "model", "hybrid"}))->capture_default_str();
  replay->add_option("--model", rp_model);
  replay->add_flag("--json", rp_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    auto rulebook = [&] { return std::make_shared<const Rulebook>(Rulebook::load(common.rulebook)); };
    auto db = [&] { return std::make_shared<const DomainDb>(DomainDb::load(common.db)); };

    if (*serve) {
      SessionManager manager(rulebook(), db());
      if (!serve_model.empty()) manager.load_model(serve_model);
      HttpServer server(manager, static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(static_dir));
      if (!server.bind(host, port)) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      server.listen_after_bind();
      g_server = nullptr;
    } else if (*generate) {
      const auto rb = rulebook();
      const auto d = db();
      const auto corpus = generate_synthetic_corpus(gen_seed, gen_count, *rb, *d);
      const GeneratorInfo info{gen_seed, gen_count};
      save_corpus(corpus, gen_out, &info);
      std::cerr << "wrote " << corpus.size() << " dialogues to " << gen_out << "\n";
    } else if (*collect) {
      const auto rb = rulebook();
      const auto corpus = load_corpus(corpus_path, *rb);
      const auto encoder = ContextEncoder::create(encoder_config(collect_enc));
      const auto records = collect_records(corpus, *rb, *db(), *encoder);
      save_records(records, records_out);
      std::cerr << "wrote " << records.size() << " records to " << records_out << "\n";
    } else if (*trainc) {
      const auto rb = rulebook();
      auto records = load_records(records_path);
      TrainConfig cfg = train_config(config_path, *rb);
      if (!records.empty()) cfg.encoder.dim = records.front().context.size();
      if (holdout > 0.0) {
        auto [tr, te] = split_records(records, 1.0 - holdout, split_seed);
        if (!split_test_out.empty()) save_records(te, split_test_out);
        records = std::move(tr);
      }
      const auto result = train(records, cfg);
      save_model(result.params, model_out);
      const auto rep = evaluate(records, result.params);
      std::printf("epochs %zu  final train loss %.6f  train accuracy %.4f\n", result.epochs_run,
                  result.train_loss.back(), rep.mini_turn_accuracy);
    } else if (*evalc) {
      const auto records = load_records(eval_records);
      const auto model = load_model(eval_model);
      const auto rep = evaluate(records, model);
      std::cout << (eval_json ? report_to_json(rep) + "\n" : report_to_text(rep));
    } else if (*fewshot) {
      const auto rb = rulebook();
      const auto corpus = load_corpus(fs_corpus, *rb);
      const auto cfg_enc = encoder_config(fs_enc);
      const auto encoder = ContextEncoder::create(cfg_enc);
      const auto records = collect_records(corpus, *rb, *db(), *encoder);
      fs_cfg.fractions = parse_fractions(fs_fractions);
      TrainConfig cfg = train_config(fs_config, *rb);
      cfg.encoder = cfg_enc;
      const auto curve = few_shot_curve(records, fs_cfg, cfg);
      std::cout << (fs_json ? curve_to_json(curve) + "\n" : curve_to_text(curve));
    } else if (*replay) {
      const auto rb = rulebook();
      const auto corpus = load_corpus(rp_corpus, *rb);
      const Policy policy = *parse_policy(rp_policy);
      std::shared_ptr<const ModelParams> model;
      if (!rp_model.empty()) model = std::make_shared<const ModelParams>(load_model(rp_model));
      const auto rep = replay_corpus(corpus, rb, db(), model, policy);
      std::cout << (rp_json ? replay_to_json(rep) + "\n" : replay_to_text(rep));
    }
  } catch (const Error& e) {
    std::cerr << "etadm: " << e.what() << "\n";
    if (e.code() == ErrorCode::InvalidArgument) return 1;
    return is_data_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "etadm: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

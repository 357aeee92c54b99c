// Command-line front end: every subcommand prints one JSON document.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssa/config.hpp"
#include "ssa/engine.hpp"
#include "ssa/error.hpp"
#include "ssa/server.hpp"
#include "ssa/synthetic.hpp"

namespace fs = std::filesystem;
using ssa::json;

namespace {

constexpr const char* kConfigName = "config.json";

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ssa::Error(ssa::ErrorCode::ValidationError, "cannot open '" + path + "'", "file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ssa::Error(ssa::ErrorCode::ValidationError, "'" + path + "' is not valid JSON: " + e.what(), "file");
    }
}

ssa::Config store_config(const std::string& store) {
    const fs::path dir(store);
    if (fs::exists(dir / kConfigName)) return ssa::load_config(dir / kConfigName);
    if (!fs::exists(dir / "events.ndjson"))
        throw ssa::Error(ssa::ErrorCode::ValidationError, "'" + store + "' is not a store; run `ssa init` first",
                         "store");
    ssa::Config cfg;
    cfg.store_dir = dir;
    return cfg;
}

json parse_inline_value(const std::string& raw) {
    try {
        return json::parse(raw);
    } catch (const json::parse_error&) {
        return raw;  // bare words are strings
    }
}

std::vector<double> parse_noise(const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ssa::Error(ssa::ErrorCode::ValidationError, "noise must look like σ1,σ2", "noise");
        }
    }
    if (out.size() != 2) throw ssa::Error(ssa::ErrorCode::ValidationError, "noise must look like σ1,σ2", "noise");
    return out;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

ssa::ApiServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social situation awareness agent"};
    app.require_subcommand(1);
    std::string store = ".";
    app.add_option("--store", store, "Store directory")->envname("SSA_STORE");

    std::function<void()> action;
    auto engine = [&store] { return ssa::Engine::open(store_config(store)); };

    auto* init = app.add_subcommand("init", "Create a store with a default config");
    std::string init_config;
    init->add_option("--config", init_config, "Config document to install instead of the default");
    init->callback([&] {
        action = [&] {
            fs::create_directories(store);
            const fs::path cfg_path = fs::path(store) / kConfigName;
            if (!fs::exists(cfg_path)) {
                json doc = init_config.empty() ? ssa::default_config_json() : read_json_file(init_config);
                ssa::parse_config(doc, store);  // validate before writing
                std::ofstream(cfg_path) << doc.dump(2) << '\n';
            }
            auto eng = engine();
            emit({{"store", fs::absolute(store).string()}, {"config", cfg_path.string()},
                  {"seq", eng->state()->last_seq}, {"truncated_bytes", eng->log().truncated_bytes()}});
        };
    });

    auto* contact = app.add_subcommand("contact", "Manage contacts")->require_subcommand(1);
    auto* contact_add = contact->add_subcommand("add", "Register a contact");
    std::string contact_file, contact_id, role, hierarchy;
    std::optional<int> frequency, quality;
    std::optional<double> years;
    contact_add->add_option("-f,--file", contact_file, "JSON file with one contact");
    contact_add->add_option("--id", contact_id);
    contact_add->add_option("--role", role);
    contact_add->add_option("--hierarchy", hierarchy);
    contact_add->add_option("--frequency", frequency);
    contact_add->add_option("--quality", quality);
    contact_add->add_option("--years", years);
    contact_add->callback([&] {
        action = [&] {
            json doc;
            if (!contact_file.empty()) {
                doc = read_json_file(contact_file);
            } else {
                doc = json{{"contact_id", contact_id}};
                if (!role.empty()) doc["role"] = role;
                if (!hierarchy.empty()) doc["hierarchy"] = hierarchy;
                if (frequency) doc["contact_frequency"] = *frequency;
                if (quality) doc["relationship_quality"] = *quality;
                if (years) doc["years_known"] = *years;
            }
            auto eng = engine();
            const auto id = eng->register_contact(doc.get<ssa::SocialRelationship>());
            emit(json(*eng->state()->contacts.find(id)));
        };
    });
    contact->add_subcommand("list", "List contacts")->callback([&] {
        action = [&] { emit(json(engine()->contacts())); };
    });

    auto* situation = app.add_subcommand("situation", "Manage situations")->require_subcommand(1);
    auto* situation_add = situation->add_subcommand("add", "Add situations from a JSON file (object or array)");
    std::string situation_file;
    situation_add->add_option("-f,--file", situation_file)->required();
    situation_add->callback([&] {
        action = [&] {
            const auto doc = read_json_file(situation_file);
            auto eng = engine();
            json out = json::array();
            for (const auto& item : doc.is_array() ? doc : json::array({doc})) {
                const auto s = eng->add_situation(item.get<ssa::SituationRecord>());
                json j = s;
                j["missing_fields"] = ssa::detect_missing_fields(s);
                out.push_back(j);
            }
            emit(doc.is_array() ? out : out[0]);
        };
    });

    std::string sit_id;
    auto* profile = app.add_subcommand("profile", "Situation profile");
    profile->add_option("situation_id", sit_id)->required();
    profile->callback([&] { action = [&] { emit(json(engine()->profile(sit_id))); }; });

    auto* projection = app.add_subcommand("projection", "Priority, value impact and support need");
    projection->add_option("situation_id", sit_id)->required();
    projection->callback([&] { action = [&] { emit(ssa::projection_json(engine()->projection(sit_id))); }; });

    app.add_subcommand("conflicts", "List agenda conflicts")->callback([&] {
        action = [&] { emit(json(engine()->conflicts())); };
    });

    std::string conflict_id;
    auto* suggest = app.add_subcommand("suggest", "Suggest which meeting to keep");
    suggest->add_option("conflict_id", conflict_id)->required();
    suggest->callback([&] {
        action = [&] {
            const auto d = engine()->suggestion(conflict_id);
            json j = *d.suggestion;
            j["decision_id"] = d.decision_id;
            emit(j);
        };
    });

    std::string recipient;
    auto* share = app.add_subcommand("share", "Decide whether to share a situation");
    share->add_option("situation_id", sit_id)->required();
    share->add_option("--recipient", recipient)->required();
    share->callback([&] {
        action = [&] {
            const auto d = engine()->decide_sharing(sit_id, recipient);
            json j = *d.share;
            j["decision_id"] = d.decision_id;
            emit(j);
        };
    });

    std::string decision_id;
    int depth = 3;
    auto* explain = app.add_subcommand("explain", "Explain a decision");
    explain->add_option("decision_id", decision_id)->required();
    explain->add_option("--depth", depth)->check(CLI::Range(1, 3));
    explain->callback([&] {
        action = [&] {
            auto eng = engine();
            const auto e = eng->explanation(decision_id, depth);
            json j = e;
            j["depth"] = depth;
            j["text"] = ssa::render(e, eng->config().catalog);
            emit(j);
        };
    });

    std::string verdict, reason, feedback_situation, corrected_profile;
    std::optional<double> corrected_priority;
    auto* feedback = app.add_subcommand("feedback", "Accept or correct a decision");
    feedback->add_option("decision_id", decision_id)->required();
    feedback->add_option("--verdict", verdict)->required()->check(CLI::IsMember({"accept", "reject"}));
    feedback->add_option("--priority", corrected_priority, "Corrected priority for the situation");
    feedback->add_option("--profile", corrected_profile, "Corrected profile as a JSON object");
    feedback->add_option("--reason", reason);
    feedback->add_option("--situation", feedback_situation, "Situation the correction refers to");
    feedback->callback([&] {
        action = [&] {
            json doc{{"suggestion_id", decision_id}, {"verdict", verdict}};
            if (corrected_priority) doc["corrected_priority"] = *corrected_priority;
            if (!corrected_profile.empty()) doc["corrected_profile"] = parse_inline_value(corrected_profile);
            if (!reason.empty()) doc["reason"] = reason;
            if (!feedback_situation.empty()) doc["situation_id"] = feedback_situation;
            emit(engine()->record_feedback(decision_id, doc.get<ssa::FeedbackRecord>()));
        };
    });

    app.add_subcommand("refit", "Refit models on all recorded training data")->callback([&] {
        action = [&] {
            auto eng = engine();
            const bool refitted = eng->apply_feedback();
            emit({{"refit", refitted}, {"seq", eng->state()->last_seq}});
        };
    });

    auto* elicit = app.add_subcommand("elicit", "Elicitation requests")->require_subcommand(1);
    elicit->add_subcommand("list", "Pending requests")->callback([&] {
        action = [&] { emit(json(engine()->pending_elicitations())); };
    });
    auto* elicit_answer = elicit->add_subcommand("answer", "Answer a request");
    std::string request_id, answers_file;
    std::vector<std::string> assignments;
    elicit_answer->add_option("request_id", request_id)->required();
    elicit_answer->add_option("--set", assignments, "path=value, e.g. participants[0].hierarchy=equal");
    elicit_answer->add_option("-f,--file", answers_file, "JSON object of answers");
    elicit_answer->callback([&] {
        action = [&] {
            json answers = answers_file.empty() ? json::object() : read_json_file(answers_file);
            for (const auto& a : assignments) {
                const auto eq = a.find('=');
                if (eq == std::string::npos)
                    throw ssa::Error(ssa::ErrorCode::ValidationError, "--set expects path=value", "set");
                answers[a.substr(0, eq)] = parse_inline_value(a.substr(eq + 1));
            }
            emit(engine()->answer_elicitation(request_id, answers));
        };
    });

    app.add_subcommand("snapshot", "Write a snapshot of the current state")->callback([&] {
        action = [&] { emit({{"seq", engine()->write_snapshot()}}); };
    });

    std::size_t cluster_k = 4;
    auto* clusters = app.add_subcommand("clusters", "Cluster the profiles of all situations");
    clusters->add_option("--k", cluster_k)->check(CLI::PositiveNumber);
    clusters->callback([&] {
        action = [&] {
            auto eng = engine();
            const auto state = eng->state();
            std::vector<ssa::SituationProfile> profiles;
            json skipped = json::array();
            for (const auto& [id, rec] : state->situations) {
                // incomplete situations have no profile until elicitation fills them in
                if (!ssa::detect_missing_fields(ssa::situation(*state, id)).empty()) {
                    skipped.push_back(id);
                    continue;
                }
                profiles.push_back(ssa::comprehension(*state, id).profile);
            }
            const auto model = ssa::fit_clusters(profiles, cluster_k);
            auto report = ssa::cluster_report(model, profiles, state->priority, state->settings->impact_table);
            report["skipped"] = skipped;
            emit(report);
        };
    });

    std::size_t sim_n = 500;
    std::uint64_t sim_seed = 0;
    std::string noise = "0.3,0.3";
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset as JSON lines");
    simulate->add_option("--n", sim_n);
    simulate->add_option("--seed", sim_seed);
    simulate->add_option("--noise", noise, "σ1,σ2");
    simulate->callback([&] {
        action = [&] {
            ssa::SyntheticSpec spec;
            spec.n = sim_n;
            spec.seed = sim_seed;
            const auto sigmas = parse_noise(noise);
            spec.sigma1 = sigmas[0];
            spec.sigma2 = sigmas[1];
            ssa::write_dataset_jsonl(std::cout, ssa::generate_synthetic(spec));
        };
    });

    std::string data_file;
    double split = 0.8;
    std::size_t eval_k = 5;
    std::uint64_t eval_seed = 0;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate the learned pipeline on a dataset");
    evaluate->add_option("--data", data_file)->required();
    evaluate->add_option("--split", split);
    evaluate->add_option("--k", eval_k);
    evaluate->add_option("--seed", eval_seed);
    evaluate->callback([&] {
        action = [&] {
            std::ifstream in(data_file);
            if (!in) throw ssa::Error(ssa::ErrorCode::ValidationError, "cannot open '" + data_file + "'", "data");
            emit(json(ssa::evaluate_pipeline(ssa::read_dataset_jsonl(in), split, eval_k, eval_seed)));
        };
    });

    int port = 8080;
    std::string host = "127.0.0.1";
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("--port", port);
    serve->add_option("--host", host);
    serve->callback([&] {
        action = [&] {
            auto eng = engine();
            ssa::ApiServer server(*eng);
            const int bound = server.bind(host, port);
            if (bound < 0)
                throw ssa::Error(ssa::ErrorCode::StorageError, "cannot bind " + host + ":" + std::to_string(port));
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << json{{"listening", host + ":" + std::to_string(bound)}}.dump() << std::endl;
            server.listen();
            g_server = nullptr;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        if (action) action();
        return 0;
    } catch (const ssa::Error& e) {
        std::cout << ssa::error_body(e).dump(2) << '\n';
        return ssa::is_internal(e.code()) ? 2 : 1;
    } catch (const json::exception& e) {
        std::cout << json{{"error_code", "ValidationError"}, {"message", e.what()}}.dump(2) << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cout << json{{"error_code", "StorageError"}, {"message", e.what()}}.dump(2) << '\n';
        return 2;
    }
}

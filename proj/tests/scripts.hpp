#ifndef SSA_TEST_SCRIPTS_HPP
#define SSA_TEST_SCRIPTS_HPP

// Random command scripts against an engine. Commands that are rejected must
// leave the log untouched; the caller compares live and replayed state.

#include <string>

#include "fixtures.hpp"
#include "ssa/engine.hpp"
#include "ssa/error.hpp"

namespace fx {

struct ScriptStats {
    int applied = 0;
    int rejected = 0;
    bool log_stable_on_error = true;
};

inline json answer_value(std::mt19937_64& rng, const std::string& path) {
    const auto field = path.substr(path.find('.') + 1);
    if (field == "role") return std::string(kRoleNames[pick<std::size_t>(rng, kRoleNames.size())]);
    if (field == "hierarchy") return std::string(kHierarchyNames[pick<std::size_t>(rng, kHierarchyNames.size())]);
    if (field == "years_known") return std::uniform_real_distribution<double>(0.0, 30.0)(rng);
    return std::uniform_int_distribution<int>(1, 7)(rng);
}

inline ScriptStats run_random_script(Engine& e, std::mt19937_64& rng, int steps) {
    ScriptStats st;
    int contacts = 0, situations = 0;
    std::uniform_int_distribution<int> op(0, 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int step = 0; step < steps; ++step) {
        const auto before = e.log().last_seq();
        try {
            switch (op(rng)) {
            case 0:
            case 1: {
                auto c = random_relationship(rng, "k" + std::to_string(contacts++));
                if (u(rng) < 0.3) c.hierarchy.reset();
                if (u(rng) < 0.2) c.role.reset();
                if (u(rng) < 0.1 && contacts > 1) c.contact_id = "k0";  // duplicate id
                e.register_contact(c);
                break;
            }
            case 2:
            case 3: {
                SituationRecord r;
                r.situation_id = "q" + std::to_string(situations++);
                r.cues = random_cues(rng);
                r.cues.start = parse_timestamp("2024-01-01T00:00Z") +
                               std::chrono::minutes(std::uniform_int_distribution<int>(0, 60 * 48)(rng));
                r.cues.duration = std::uniform_int_distribution<int>(15, 240)(rng);
                const int n = contacts == 0 ? 0 : std::uniform_int_distribution<int>(0, 2)(rng);
                for (int i = 0; i < n; ++i)
                    r.participant_ids.push_back("k" + std::to_string(pick<int>(rng, static_cast<std::size_t>(contacts))));
                if (u(rng) < 0.05) r.participant_ids.push_back("nobody");
                e.add_situation(r);
                break;
            }
            case 4: {
                const auto pending = e.pending_elicitations();
                if (pending.empty()) break;
                const auto& req = pending[pick<std::size_t>(rng, pending.size())];
                json answers = json::object();
                for (const auto& f : req.missing_fields)
                    if (u(rng) < 0.8) answers[f] = answer_value(rng, f);
                for (const auto& d : req.uncertain)
                    if (u(rng) < 0.5) answers["profile." + std::string(to_string(d.dimension))] = 1.0 + 5.0 * u(rng);
                if (answers.empty()) answers["profile.duty"] = 7.0;  // rejected
                e.answer_elicitation(req.request_id, answers);
                break;
            }
            case 5: {
                const auto cs = e.conflicts();
                if (cs.empty()) break;
                e.suggestion(cs[pick<std::size_t>(rng, cs.size())].conflict_id);
                break;
            }
            case 6: {
                if (situations == 0 || contacts == 0) break;
                e.decide_sharing("q" + std::to_string(pick<int>(rng, static_cast<std::size_t>(situations))),
                                 "k" + std::to_string(pick<int>(rng, static_cast<std::size_t>(contacts))));
                break;
            }
            case 7:
            case 8: {
                const auto s = e.state();
                if (s->decision_order.empty()) break;
                FeedbackRecord f;
                f.suggestion_id = s->decision_order[pick<std::size_t>(rng, s->decision_order.size())];
                f.verdict = u(rng) < 0.4 ? Verdict::accept : Verdict::reject;
                if (f.verdict == Verdict::reject) {
                    if (u(rng) < 0.7) f.corrected_priority = u(rng) < 0.1 ? 9.0 : 1.0 + 5.0 * u(rng);
                    if (u(rng) < 0.4) f.corrected_profile = random_profile(rng);
                }
                e.record_feedback(f.suggestion_id, f);
                break;
            }
            default:
                e.apply_feedback();
            }
            ++st.applied;
        } catch (const Error&) {
            ++st.rejected;
            if (e.log().last_seq() != before) st.log_stable_on_error = false;
        }
    }
    return st;
}

}  // namespace fx

#endif

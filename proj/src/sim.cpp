#include "pdagent/sim.hpp"

#include <cctype>
#include <sstream>

#include "pdagent/errors.hpp"
#include "pdagent/text.hpp"

namespace pdagent {

nlohmann::json SimScenario::to_json() const {
    nlohmann::json out = {
        {"questions", questions},
        {"responses", responses},
        {"extraction_payload", extraction_payload},
    };
    if (inference_payload) out["inference_payload"] = *inference_payload;
    return out;
}

SimScenario SimScenario::from_json(const nlohmann::json& doc) {
    SimScenario scenario;
    scenario.questions = doc.value("questions", std::vector<std::string>{});
    scenario.responses = doc.value("responses", std::vector<std::string>{});
    scenario.extraction_payload = doc.value("extraction_payload", "");
    if (doc.contains("inference_payload")) {
        scenario.inference_payload = doc["inference_payload"].get<std::string>();
    }
    if (scenario.questions.empty() || scenario.responses.empty()) {
        throw ConfigError("sim scenario needs at least one question and one response");
    }
    return scenario;
}

SimChatProvider::SimChatProvider(SimScenario scenario) : scenario_(std::move(scenario)) {
    if (scenario_.questions.empty() || scenario_.responses.empty()) {
        throw ConfigError("sim scenario needs at least one question and one response");
    }
}

std::string SimChatProvider::do_complete(const std::vector<ChatMessage>& messages,
                                         const ChatRequestParams&) {
    if (messages.front().role == Role::System &&
        contains(messages.front().content, "Embody the following persona")) {
        return answer_target(messages);
    }
    const std::string& prompt = messages.back().content;
    if (contains(prompt, "identify implicit bridging relations")) {
        if (scenario_.extraction_payload.empty()) {
            throw ProviderError("sim scenario has no extraction payload");
        }
        return scenario_.extraction_payload;
    }
    if (contains(prompt, "PERSONA SCHEMA")) {
        return answer_inference(prompt);
    }
    if (contains(prompt, "You are conducting a friendly interview")) {
        return answer_question(prompt);
    }
    throw ProviderError("sim provider cannot route this request");
}

std::string SimChatProvider::answer_question(const std::string& prompt) const {
    // The history block renders one "Q<i>: ..." line per prior turn.
    std::size_t turns = 0;
    std::size_t pos = 0;
    while ((pos = prompt.find("\nQ", pos)) != std::string::npos) {
        std::size_t digit = pos + 2;
        while (digit < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[digit]))) {
            ++digit;
        }
        if (digit > pos + 2 && digit < prompt.size() && prompt[digit] == ':') {
            ++turns;
        }
        pos += 2;
    }
    return scenario_.questions[turns % scenario_.questions.size()];
}

std::string SimChatProvider::answer_target(const std::vector<ChatMessage>& messages) const {
    std::size_t prior = 0;
    for (const ChatMessage& m : messages) {
        if (m.role == Role::Assistant) ++prior;
    }
    return scenario_.responses[prior % scenario_.responses.size()];
}

namespace {

struct VocabularySlot {
    std::string dimension;
    std::string subcategory;
    std::vector<std::string> values;
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

/// Vocabulary lines look like "- <Dim> / <Sub>: v1 | v2"; nothing else in the
/// inference prompts starts with "- ".
std::vector<VocabularySlot> parse_vocabulary(const std::string& prompt) {
    std::vector<VocabularySlot> slots;
    for (const std::string& line : split_lines(prompt)) {
        if (line.rfind("- ", 0) != 0) continue;
        const std::size_t sep = line.find(" / ");
        const std::size_t colon = line.find(": ", sep == std::string::npos ? 0 : sep);
        if (sep == std::string::npos || colon == std::string::npos) continue;
        VocabularySlot slot;
        slot.dimension = line.substr(2, sep - 2);
        slot.subcategory = line.substr(sep + 3, colon - sep - 3);
        std::string values = line.substr(colon + 2);
        std::size_t start = 0;
        while (true) {
            const std::size_t bar = values.find(" | ", start);
            if (bar == std::string::npos) {
                slot.values.push_back(trim(values.substr(start)));
                break;
            }
            slot.values.push_back(trim(values.substr(start, bar - start)));
            start = bar + 3;
        }
        slots.push_back(std::move(slot));
    }
    return slots;
}

std::string evidence_section(const std::string& prompt) {
    std::size_t start = prompt.find("\nTRANSCRIPT\n");
    if (start == std::string::npos) start = prompt.find("\nGRAPH SUMMARY\n");
    if (start == std::string::npos) return prompt;
    const std::size_t end = prompt.find("\nTASK\n", start);
    if (end == std::string::npos) return prompt.substr(start);
    return prompt.substr(start, end - start);
}

}  // namespace

std::string SimChatProvider::answer_inference(const std::string& prompt) const {
    if (scenario_.inference_payload) {
        return *scenario_.inference_payload;
    }
    const std::vector<VocabularySlot> slots = parse_vocabulary(prompt);
    if (slots.empty()) {
        throw ProviderError("sim reader found no schema vocabulary in inference prompt");
    }
    const std::string evidence = evidence_section(prompt);

    nlohmann::json reply = nlohmann::json::object();
    for (const VocabularySlot& slot : slots) {
        std::size_t best_count = 0;
        std::string best = slot.values.front();
        for (const std::string& value : slot.values) {
            const std::size_t count = count_occurrences_ci(evidence, value);
            if (count > best_count) {
                best_count = count;
                best = value;
            }
        }
        reply[slot.dimension][slot.subcategory] = best;
    }
    return reply.dump();
}

SimScenario default_sim_scenario() {
    SimScenario scenario;
    scenario.questions = {
        "What does a typical weekday look like for you, start to finish?",
        "You mentioned your mornings are busy. What usually fills them up?",
        "When something unexpected derails your day, how do you handle it?",
        "What do you look forward to once the workday is over?",
        "If you had a completely free weekend, how would you spend it?",
    };
    scenario.responses = {
        "My alarm goes off before sunrise. I do hospital rounds first thing, checking on "
        "patients from the night shift, then clinic hours downtown until evening. The city "
        "traffic on the commute home is the only quiet part of my day.",
        "Rounds, mostly. The ward hands over at seven, so I review charts over coffee, then "
        "walk the ward with my stethoscope and a list of patients. New admissions from the "
        "emergency department get seen first.",
        "I try to stay curious about it instead of annoyed. An unexpected diagnosis is a "
        "puzzle, and puzzles are why I went into medicine. I will happily read journals past "
        "midnight when a case surprises me.",
        "Reading, honestly. There is a novel on my nightstand and a stack of journals beside "
        "it. My apartment is small but the armchair by the window makes up for it.",
        "A long morning with a book, a walk through the city market, and maybe writing up a "
        "case report. Quiet, but never boring.",
    };

    // Twelve relations over the dialogue's concepts.
    const nlohmann::json payload = {
        {"bridging_relations",
         nlohmann::json::array({
             {{"anchor", "hospital"},
              {"anaphor", "rounds"},
              {"relation_type", "in"},
              {"explanation", "Rounds take place inside the hospital."},
              {"sentence_context", "I do hospital rounds first thing"}},
             {{"anchor", "rounds"},
              {"anaphor", "patients"},
              {"relation_type", "theme"},
              {"explanation", "Patients are what rounds are about."},
              {"sentence_context", "checking on patients from the night shift"}},
             {{"anchor", "patients"},
              {"anaphor", "charts"},
              {"relation_type", "theme"},
              {"explanation", "Charts record the patients being reviewed."},
              {"sentence_context", "I review charts over coffee"}},
             {{"anchor", "rounds"},
              {"anaphor", "stethoscope"},
              {"relation_type", "instrument"},
              {"explanation", "The stethoscope is the tool used during rounds."},
              {"sentence_context", "walk the ward with my stethoscope"}},
             {{"anchor", "ward"},
              {"anaphor", "hospital"},
              {"relation_type", "part-of"},
              {"explanation", "A ward is a section of the hospital."},
              {"sentence_context", "The ward hands over at seven"}},
             {{"anchor", "patients"},
              {"anaphor", "admissions"},
              {"relation_type", "member-of"},
              {"explanation", "New admissions are members of the patient population."},
              {"sentence_context", "New admissions from the emergency department"}},
             {{"anchor", "diagnosis"},
              {"anaphor", "medicine"},
              {"relation_type", "in"},
              {"explanation", "Diagnosis is situated within the practice of medicine."},
              {"sentence_context", "An unexpected diagnosis is a puzzle"}},
             {{"anchor", "diagnosis"},
              {"anaphor", "journals"},
              {"relation_type", "instrument"},
              {"explanation", "Journals are the means of working through a diagnosis."},
              {"sentence_context", "read journals past midnight when a case surprises me"}},
             {{"anchor", "reading"},
              {"anaphor", "novel"},
              {"relation_type", "theme"},
              {"explanation", "The novel is the object of the reading."},
              {"sentence_context", "There is a novel on my nightstand"}},
             {{"anchor", "morning"},
              {"anaphor", "rounds"},
              {"relation_type", "temporal"},
              {"explanation", "Rounds happen during the morning."},
              {"sentence_context", "Rounds, mostly. The ward hands over at seven"}},
             {{"anchor", "city"},
              {"anaphor", "market"},
              {"relation_type", "in"},
              {"explanation", "The market is located in the city."},
              {"sentence_context", "a walk through the city market"}},
             {{"anchor", "case"},
              {"anaphor", "case report"},
              {"relation_type", "cause-of"},
              {"explanation", "The case gives rise to the written case report."},
              {"sentence_context", "maybe writing up a case report"}},
         })},
    };
    scenario.extraction_payload = payload.dump();
    return scenario;
}

}  // namespace pdagent

// SPDX-License-Identifier: Apache-2.0
#include "keysig/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "keysig/diagnostics.hpp"
#include "keysig/util.hpp"

namespace keysig {

PromptTemplate PromptTemplate::builtin() {
    PromptTemplate t;
    t.text =
        "You are a senior hardware verification engineer. Write SystemVerilog\n"
        "assertions (SVA) for one specific signal of the design described below.\n"
        "\n"
        "== Design overview ==\n"
        "{overview}\n"
        "\n"
        "== Target signal ==\n"
        "Signal: {signal}\n"
        "Category: {class}\n"
        "Instantiation chain: {chain}\n"
        "\n"
        "== RTL slice ==\n"
        "The fragments below contain every statement that drives or gates the\n"
        "target signal:\n"
        "\n"
        "{slice}\n"
        "\n"
        "== Task ==\n"
        "{class_instruction}\n"
        "Write one or more concurrent SVA assertions that tightly constrain the\n"
        "behavior of {signal}. Reference only signals that appear in the RTL\n"
        "slice above. Sample sequential behavior with an explicit clocking\n"
        "event such as @(posedge clk). Reply with each assertion as a\n"
        "self-contained `assert property (...);` statement inside one\n"
        "```systemverilog code block.\n";
    return t;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open template '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    PromptTemplate t;
    t.text = ss.str();
    return t;
}

namespace {

const char* class_instruction(SignalClass c) {
    switch (c) {
    case SignalClass::StateRegister:
        return "The target is a state register: constrain its reset value, its "
               "legal transitions, and the conditions under which it may change.";
    case SignalClass::ControlSignal:
        return "The target is a control signal: constrain when it may assert and "
               "what behavior it gates.";
    case SignalClass::OutputPort:
        return "The target is an output port: constrain its relationship to the "
               "internal state and the inputs that drive it.";
    case SignalClass::InternalSignal:
        return "The target is an internal signal: constrain the invariants of the "
               "intermediate computation it carries.";
    }
    return "";
}

std::string render(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    static const std::regex placeholder("\\{([a-z_]+)\\}");
    std::string out;
    out.reserve(tmpl.size());
    auto begin = std::sregex_iterator(tmpl.begin(), tmpl.end(), placeholder);
    auto end = std::sregex_iterator();
    std::size_t last = 0;
    std::set<std::string> seen;
    for (auto it = begin; it != end; ++it) {
        const std::smatch& m = *it;
        std::string key = m[1].str();
        auto vit = values.find(key);
        if (vit == values.end())
            throw TemplateError("unknown placeholder '{" + key + "}' in prompt template");
        out += tmpl.substr(last, m.position() - last);
        out += vit->second;
        last = m.position() + m.length();
        seen.insert(key);
    }
    out += tmpl.substr(last);
    for (const auto& required : {"signal", "class", "chain", "overview", "slice"})
        if (!seen.count(required))
            throw TemplateError(std::string("prompt template is missing the required placeholder '{") +
                                required + "}'");
    return out;
}

} // namespace

PromptBundle build_prompt(const RtlSlice& slice, const std::string& overview,
                          const PromptTemplate& tmpl, int prompt_token_budget) {
    PromptBundle bundle;
    bundle.signal = slice.root.name;
    bundle.signal_class = to_string(slice.root.klass);
    bundle.chain = slice.chain;
    bundle.template_id = fnv1a_hex(tmpl.text);

    std::map<std::string, std::string> values = {
        {"signal", slice.root.name},
        {"class", bundle.signal_class},
        {"chain", slice.chain},
        {"overview", overview.empty() ? "(no specification provided)" : overview},
        {"slice", slice.combined_text()},
        {"class_instruction", class_instruction(slice.root.klass)},
    };
    bundle.rendered = render(tmpl.text, values);
    bundle.token_estimate = static_cast<int>(count_tokens(bundle.rendered));

    if (prompt_token_budget > 0 && bundle.token_estimate > prompt_token_budget) {
        // drop slice lines from the end until the prompt fits
        std::vector<std::string> lines = split(slice.combined_text(), '\n');
        int total = static_cast<int>(lines.size());
        int keep = total;
        while (keep > 0) {
            --keep;
            std::string truncated;
            for (int i = 0; i < keep; ++i) {
                truncated += lines[i];
                truncated += '\n';
            }
            truncated += "// [slice truncated: showing " + std::to_string(keep) + " of " +
                         std::to_string(total) + " lines]\n";
            values["slice"] = truncated;
            bundle.rendered = render(tmpl.text, values);
            bundle.token_estimate = static_cast<int>(count_tokens(bundle.rendered));
            if (bundle.token_estimate <= prompt_token_budget)
                break;
        }
        bundle.truncated_slice = true;
    }
    return bundle;
}

AssertionRecord generate_for_signal(const RtlSlice& slice, const std::string& overview,
                                    LlmClient& client, const GenerationOptions& opts,
                                    TokenTally& tally) {
    AssertionRecord record;
    record.signal = slice.root.name;

    LintContext lint_ctx;
    lint_ctx.require_clocking = !slice.root.combinational;
    lint_ctx.external_command = opts.external_verifier;
    lint_ctx.allowed_names = slice.declared_names;
    for (const auto& n : slice.nodes) {
        auto dot = n.rfind('.');
        lint_ctx.allowed_names.insert(dot == std::string::npos ? n : n.substr(dot + 1));
    }
    for (const auto& seg : split(slice.chain, '.'))
        lint_ctx.allowed_names.insert(seg);

    std::string feedback;
    for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
        PromptBundle bundle = build_prompt(slice, overview, opts.prompt_template,
                                           opts.prompt_token_budget);
        std::string prompt = bundle.rendered;
        if (opts.attempt_feedback && !feedback.empty())
            prompt += "\n== Feedback from the previous attempt ==\n" + feedback;

        tally.try_charge(static_cast<long>(count_tokens(prompt)));

        LlmResponse response;
        int transport_left = opts.transport_retries;
        for (;;) {
            try {
                response = client.request(record.signal, attempt, prompt);
                break;
            } catch (const AuthError&) {
                throw;
            } catch (const TransportError&) {
                if (transport_left-- <= 0)
                    throw;
            }
        }
        tally.add(response.input_tokens, response.output_tokens);

        AttemptRecord att;
        att.prompt_hash = fnv1a_hex(prompt);
        att.response = response.text;
        att.input_tokens = response.input_tokens;
        att.output_tokens = response.output_tokens;

        std::vector<std::string> passing;
        std::string reasons;
        for (const auto& text : extract_assertions(response.text)) {
            LintResult verdict = lint_assertion(text, lint_ctx);
            if (verdict.pass)
                passing.push_back(text);
            else
                reasons += (reasons.empty() ? "" : "; ") + verdict.reason;
            att.assertions.emplace_back(text, verdict);
        }
        if (att.assertions.empty())
            reasons = "no assertion found in the response";
        record.attempts.push_back(std::move(att));

        if (!passing.empty()) {
            record.status = GenStatus::Accepted;
            record.accepted = std::move(passing);
            return record;
        }
        feedback = reasons;
    }
    record.status = GenStatus::Skipped;
    return record;
}

std::string record_to_json(const AssertionRecord& record) {
    nlohmann::ordered_json j;
    j["schema"] = "keysig-assertion/1";
    j["signal"] = record.signal;
    j["status"] = record.status == GenStatus::Accepted ? "accepted" : "skipped";
    j["attempts"] = nlohmann::ordered_json::array();
    for (const auto& att : record.attempts) {
        nlohmann::ordered_json a;
        a["prompt_hash"] = att.prompt_hash;
        a["response"] = att.response;
        a["assertions"] = nlohmann::ordered_json::array();
        for (const auto& [text, verdict] : att.assertions) {
            a["assertions"].push_back({{"text", text},
                                       {"verdict", verdict.pass ? "pass" : "fail"},
                                       {"reason", verdict.reason}});
        }
        a["input_tokens"] = att.input_tokens;
        a["output_tokens"] = att.output_tokens;
        j["attempts"].push_back(std::move(a));
    }
    j["accepted"] = record.accepted;
    return j.dump(2) + "\n";
}

std::string report_to_json(const RunReport& report, const std::vector<AssertionRecord>& records) {
    nlohmann::ordered_json j;
    j["schema"] = "keysig-run-report/1";
    j["signals"] = report.signals;
    j["accepted"] = report.accepted;
    j["skipped"] = report.skipped;
    j["input_tokens"] = report.input_tokens;
    j["output_tokens"] = report.output_tokens;
    j["per_signal"] = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        long in_tok = 0, out_tok = 0;
        for (const auto& a : r.attempts) {
            in_tok += a.input_tokens;
            out_tok += a.output_tokens;
        }
        j["per_signal"].push_back({{"signal", r.signal},
                                   {"status", r.status == GenStatus::Accepted ? "accepted" : "skipped"},
                                   {"attempts", r.attempts.size()},
                                   {"input_tokens", in_tok},
                                   {"output_tokens", out_tok}});
    }
    return j.dump(2) + "\n";
}

RunReport run_generation(const std::vector<RtlSlice>& slices, const std::string& overview,
                         const EndpointConfig& endpoint, const GenerationOptions& opts,
                         const std::string& out_dir, int parallelism) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "assertions");

    TokenTally tally(endpoint.token_budget);
    std::vector<AssertionRecord> records(slices.size());

    if (parallelism <= 1) {
        auto client = make_client(endpoint);
        for (std::size_t i = 0; i < slices.size(); ++i)
            records[i] = generate_for_signal(slices[i], overview, *client, opts, tally);
    } else {
        std::mutex mu;
        std::size_t next = 0;
        std::exception_ptr first_error;
        auto worker = [&]() {
            auto client = make_client(endpoint);
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= slices.size() || first_error)
                        return;
                    i = next++;
                }
                try {
                    records[i] = generate_for_signal(slices[i], overview, *client, opts, tally);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first_error)
                        first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> threads;
        int n = std::min<int>(parallelism, static_cast<int>(slices.size()));
        for (int t = 0; t < n; ++t)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
        if (first_error)
            std::rethrow_exception(first_error);
    }

    RunReport report;
    report.signals = static_cast<int>(records.size());
    for (const auto& r : records) {
        if (r.status == GenStatus::Accepted)
            ++report.accepted;
        else
            ++report.skipped;
    }
    report.input_tokens = tally.input_total();
    report.output_tokens = tally.output_total();

    for (const auto& r : records) {
        std::ofstream out(fs::path(out_dir) / "assertions" / (sanitize_filename(r.signal) + ".json"),
                          std::ios::binary);
        out << record_to_json(r);
    }
    std::ofstream out(fs::path(out_dir) / "run_report.json", std::ios::binary);
    out << report_to_json(report, records);
    return report;
}

} // namespace keysig

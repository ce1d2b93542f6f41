// SPDX-License-Identifier: Apache-2.0
#include "keysig/llm.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "keysig/diagnostics.hpp"
#include "keysig/util.hpp"

namespace keysig {

void TokenTally::try_charge(long input_estimate) const {
    if (budget_ > 0 && input_.load() + input_estimate > budget_)
        throw BudgetExceeded("run token budget of " + std::to_string(budget_) +
                             " input tokens would be exceeded (spent " + std::to_string(input_.load()) +
                             ", next request ~" + std::to_string(input_estimate) + ")");
}

void TokenTally::add(long input_tokens, long output_tokens) {
    input_ += input_tokens;
    output_ += output_tokens;
}

namespace {

class HttpChatClient : public LlmClient {
public:
    explicit HttpChatClient(const EndpointConfig& cfg) : cfg_(cfg) {
        if (cfg_.base_url.empty())
            throw ConfigError("endpoint base URL is not configured");
        const char* key = cfg_.api_key_env.empty() ? nullptr : std::getenv(cfg_.api_key_env.c_str());
        if (!key || !*key)
            throw AuthError("credential environment variable '" + cfg_.api_key_env + "' is not set");
        api_key_ = key;
    }

    LlmResponse request(const std::string&, int, const std::string& prompt) override {
        nlohmann::json body;
        body["model"] = cfg_.model;
        body["messages"] = {{{"role", "user"}, {"content", prompt}}};

        httplib::Client cli(cfg_.base_url);
        cli.set_connection_timeout(10);
        cli.set_read_timeout(120);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res)
            throw TransportError("request to " + cfg_.base_url + cfg_.path + " failed: " +
                                 httplib::to_string(res.error()));
        if (res->status == 401 || res->status == 403)
            throw AuthError("endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
        if (res->status < 200 || res->status >= 300)
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status));

        LlmResponse out;
        try {
            auto j = nlohmann::json::parse(res->body);
            out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (j.contains("usage")) {
                out.input_tokens = j["usage"].value("prompt_tokens", 0L);
                out.output_tokens = j["usage"].value("completion_tokens", 0L);
            }
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed endpoint response: ") + e.what());
        }
        if (out.input_tokens == 0)
            out.input_tokens = static_cast<long>(count_tokens(prompt));
        if (out.output_tokens == 0)
            out.output_tokens = static_cast<long>(count_tokens(out.text));
        return out;
    }

private:
    EndpointConfig cfg_;
    std::string api_key_;
};

class MockClient : public LlmClient {
public:
    explicit MockClient(const EndpointConfig& cfg) : dir_(cfg.mock_dir) {
        if (!std::filesystem::is_directory(dir_))
            throw ConfigError("mock response directory '" + dir_ + "' does not exist");
    }

    LlmResponse request(const std::string& signal, int attempt, const std::string& prompt) override {
        namespace fs = std::filesystem;
        std::string base = sanitize_filename(signal);
        std::vector<fs::path> candidates = {
            fs::path(dir_) / (base + "." + std::to_string(attempt) + ".txt"),
            fs::path(dir_) / ("default." + std::to_string(attempt) + ".txt"),
            fs::path(dir_) / "default.txt",
        };
        for (const auto& p : candidates) {
            std::ifstream in(p, std::ios::binary);
            if (!in)
                continue;
            std::ostringstream ss;
            ss << in.rdbuf();
            LlmResponse out;
            out.text = ss.str();
            out.input_tokens = static_cast<long>(count_tokens(prompt));
            out.output_tokens = static_cast<long>(count_tokens(out.text));
            return out;
        }
        throw TransportError("no scripted mock response for signal '" + signal + "' attempt " +
                             std::to_string(attempt) + " in '" + dir_ + "'");
    }

private:
    std::string dir_;
};

} // namespace

std::unique_ptr<LlmClient> make_http_client(const EndpointConfig& cfg) {
    return std::make_unique<HttpChatClient>(cfg);
}

std::unique_ptr<LlmClient> make_mock_client(const EndpointConfig& cfg) {
    return std::make_unique<MockClient>(cfg);
}

std::unique_ptr<LlmClient> make_client(const EndpointConfig& cfg) {
    if (!cfg.mock_dir.empty())
        return make_mock_client(cfg);
    return make_http_client(cfg);
}

} // namespace keysig

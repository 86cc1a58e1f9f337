#include "visprompt/qa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "visprompt/errors.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS  // report transport errors via result codes
#include "httplib.h"

namespace visprompt {

const char* task_name(TaskKind t) {
    switch (t) {
        case TaskKind::web_annotation: return "web_annotation";
        case TaskKind::layout_qa: return "layout_qa";
        case TaskKind::cot: return "cot";
    }
    return "web_annotation";
}

TaskKind task_from_name(const std::string& name) {
    if (name == "web_annotation") return TaskKind::web_annotation;
    if (name == "layout_qa") return TaskKind::layout_qa;
    if (name == "cot") return TaskKind::cot;
    throw InvalidInput("unknown task: " + name);
}

void validate(const ConversationRecord& rec) {
    if (rec.conversations.empty())
        throw InvalidInput("record has no conversation turns");
    for (size_t i = 0; i < rec.conversations.size(); ++i) {
        const std::string& from = rec.conversations[i].from;
        const std::string expected = (i % 2 == 0) ? "human" : "gpt";
        if (from != expected)
            throw InvalidInput("turn " + std::to_string(i) + " must be from \"" +
                               expected + "\", got \"" + from + "\"");
    }
    if (rec.conversations[0].value.rfind("<image>\n", 0) != 0)
        throw InvalidInput("first human turn must start with \"<image>\\n\"");
    if (rec.task == TaskKind::cot && rec.conversations.size() != 4)
        throw InvalidInput("cot record must have exactly 4 turns, got " +
                           std::to_string(rec.conversations.size()));
}

uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t Rng::next_u64() { return splitmix64(state_); }

size_t Rng::next_index(size_t n) {
    if (n == 0) throw InvalidInput("next_index requires n >= 1");
    if (n == 1) return 0;
    const uint64_t bound = n;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return static_cast<size_t>(v % bound);
}

uint64_t hash_string(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string apply_template(
    std::string tpl,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
    for (const auto& [key, value] : substitutions) {
        const std::string token = "{" + key + "}";
        size_t pos = 0;
        while ((pos = tpl.find(token, pos)) != std::string::npos) {
            tpl.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return tpl;
}

std::string format_bbox_ratio(const Rect& rect, int img_w, int img_h) {
    if (img_w <= 0 || img_h <= 0)
        throw InvalidInput("image dimensions must be positive");
    const auto fmt = [](double v) {
        // Half-up to 3 decimals without printf rounding-mode surprises.
        const long long milli = static_cast<long long>(std::floor(v * 1000.0 + 0.5));
        std::string s = std::to_string(milli / 1000) + ".";
        const long long frac = milli % 1000;
        if (frac < 100) s += '0';
        if (frac < 10) s += '0';
        return s + std::to_string(frac);
    };
    std::string out = "[";
    out += fmt(static_cast<double>(rect.x) / img_w) + ", ";
    out += fmt(static_cast<double>(rect.y) / img_h) + ", ";
    out += fmt(static_cast<double>(rect.x + rect.w) / img_w) + ", ";
    out += fmt(static_cast<double>(rect.y + rect.h) / img_h) + "]";
    return out;
}

const ElementBox& select_box(const std::vector<ElementBox>& boxes, Rng& rng) {
    if (boxes.empty()) throw NoCandidates("no boxes to select from");
    return boxes[rng.next_index(boxes.size())];
}

ConversationRecord make_web_annotation_record(const std::string& id,
                                              const std::string& image_ref,
                                              const std::vector<ElementBox>& boxes,
                                              const ElementBox& selected,
                                              Rng& rng, const QaTemplates& tpl) {
    const bool member = std::any_of(boxes.begin(), boxes.end(),
                                    [&](const ElementBox& b) {
                                        return b.label == selected.label &&
                                               b.rect == selected.rect;
                                    });
    if (!member) throw InvalidInput("selected box is not in the box list");
    if (selected.text.empty())
        throw InvalidInput("selected box has no text");
    if (tpl.web_question.empty())
        throw InvalidConfig("templates.web_question must not be empty");

    const size_t variant = tpl.web_question.size() == 1
                               ? 0
                               : rng.next_index(tpl.web_question.size());
    const std::string q =
        apply_template(tpl.web_question[variant], {{"text", selected.text}});
    const std::string a = apply_template(
        tpl.web_answer, {{"label", std::to_string(selected.label)}});

    ConversationRecord rec;
    rec.id = id;
    rec.image = image_ref;
    rec.task = TaskKind::web_annotation;
    rec.conversations = {{"human", "<image>\n" + q}, {"gpt", a}};
    validate(rec);
    return rec;
}

std::vector<ConversationRecord> make_layout_records(
    const std::string& id_prefix, const std::string& image_ref,
    const std::vector<LayoutBlock>& blocks, int img_w, int img_h,
    const QaTemplates& tpl) {
    std::vector<ConversationRecord> out;
    if (blocks.empty()) return out;

    std::string inventory;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (i) inventory += "\n";
        inventory += apply_template(
            tpl.layout_inventory_item,
            {{"category", category_name(blocks[i].category)},
             {"bbox", format_bbox_ratio(blocks[i].rect, img_w, img_h)}});
    }
    ConversationRecord inv;
    inv.id = id_prefix + "_inventory";
    inv.image = image_ref;
    inv.task = TaskKind::layout_qa;
    inv.conversations = {{"human", "<image>\n" + tpl.layout_inventory_question},
                         {"gpt", inventory}};
    validate(inv);
    out.push_back(std::move(inv));

    for (Category c : kAllCategories) {
        const long long n = std::count_if(
            blocks.begin(), blocks.end(),
            [&](const LayoutBlock& b) { return b.category == c; });
        if (n == 0) continue;
        ConversationRecord rec;
        rec.id = id_prefix + "_count_" + category_name(c);
        rec.image = image_ref;
        rec.task = TaskKind::layout_qa;
        rec.conversations = {
            {"human", "<image>\n" + apply_template(tpl.layout_count_question,
                                                   {{"category", category_name(c)}})},
            {"gpt", apply_template(tpl.layout_count_answer,
                                   {{"count", std::to_string(n)}})}};
        validate(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains_any(const std::string& hay, std::initializer_list<const char*> needles) {
    for (const char* n : needles)
        if (hay.find(n) != std::string::npos) return true;
    return false;
}

}  // namespace

std::pair<std::string, std::string> offline_cot(const std::string& text) {
    if (text.empty()) throw InvalidInput("element text must be non-empty");
    const std::string answer1 =
        "The red box contains the element \"" + text + "\".";
    const std::string low = lowercase(text);
    std::string answer2;
    if (contains_any(low, {"login", "log in", "sign in", "sign up", "register"})) {
        answer2 = "Clicking \"" + text +
                  "\" would open an authentication page where the user enters "
                  "credentials or creates an account.";
    } else if (contains_any(low, {"cart", "checkout", "basket"})) {
        answer2 = "Clicking \"" + text +
                  "\" would open the shopping cart page listing the selected "
                  "items with a checkout option.";
    } else if (low.find("search") != std::string::npos) {
        answer2 = "Clicking \"" + text +
                  "\" would show a search results page for the entered query.";
    } else if (low.find("contact") != std::string::npos) {
        answer2 = "Clicking \"" + text +
                  "\" would open a contact page with ways to reach the site.";
    } else {
        answer2 = "Clicking \"" + text +
                  "\" would open a page related to \"" + text + "\".";
    }
    return {answer1, answer2};
}

std::string OfflineCoTClient::complete(const std::string& /*system_prompt*/,
                                       const std::string& user_prompt,
                                       const std::string& /*image*/) {
    // Element text = last complete double-quoted span.
    const size_t close = user_prompt.rfind('"');
    if (close == std::string::npos || close == 0)
        throw ClientError("offline client: no quoted element text in prompt");
    const size_t open = user_prompt.rfind('"', close - 1);
    if (open == std::string::npos)
        throw ClientError("offline client: unbalanced quotes in prompt");
    const std::string text = user_prompt.substr(open + 1, close - open - 1);
    if (text.empty())
        throw ClientError("offline client: empty element text in prompt");

    const auto [answer1, answer2] = offline_cot(text);
    const bool round2 =
        lowercase(user_prompt).find("after clicking") != std::string::npos;
    return round2 ? answer2 : answer1;
}

HttpCoTClient::HttpCoTClient(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}

std::string HttpCoTClient::complete(const std::string& system_prompt,
                                    const std::string& user_prompt,
                                    const std::string& image) {
    // Split "http://host[:port]/path".
    std::string rest = endpoint_;
    const size_t scheme_end = rest.find("://");
    if (scheme_end == std::string::npos)
        throw ClientError("llm.endpoint must be an http:// URL");
    const std::string scheme = rest.substr(0, scheme_end);
    if (scheme != "http")
        throw ClientError("only http:// endpoints are supported, got " + scheme);
    rest = rest.substr(scheme_end + 3);
    const size_t slash = rest.find('/');
    const std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    if (host.empty()) throw ClientError("llm.endpoint has no host");

    std::string image_b64;
    if (!image.empty()) {
        std::ifstream in(image, std::ios::binary);
        if (!in) throw ClientError("cannot read image for request: " + image);
        std::ostringstream buf;
        buf << in.rdbuf();
        image_b64 = base64_encode(buf.str());
    }

    nlohmann::ordered_json body;
    body["system"] = system_prompt;
    body["user"] = user_prompt;
    body["image"] = image_b64;

    httplib::Client cli(host);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(60);
    httplib::Headers headers;
    if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

    const auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw ClientError("request to " + endpoint_ + " failed: " +
                          httplib::to_string(res.error()));
    if (res->status != 200)
        throw ClientError("request to " + endpoint_ + " returned status " +
                          std::to_string(res->status));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
        !j["text"].is_string())
        throw ClientError("endpoint response is not {\"text\": ...}");
    return j["text"].get<std::string>();
}

ConversationRecord make_cot_record(const std::string& id,
                                   const std::string& image_ref,
                                   const std::string& image_path,
                                   const ElementBox& box, int img_w, int img_h,
                                   CoTClient& client, const QaTemplates& tpl) {
    if (box.text.empty()) throw InvalidInput("cot record needs box text");
    const std::string bbox = format_bbox_ratio(box.rect, img_w, img_h);

    const std::string q1 = apply_template(tpl.cot_question_1, {{"bbox", bbox}});
    const std::string user1 = apply_template(
        tpl.cot_user_1, {{"bbox", bbox}, {"text", box.text}});
    const std::string a1 = client.complete(tpl.cot_system_1, user1, image_path);

    const std::string q2 = tpl.cot_question_2;
    const std::string user2 = apply_template(
        tpl.cot_user_2,
        {{"q1", q1}, {"a1", a1}, {"bbox", bbox}, {"text", box.text}});
    const std::string a2 = client.complete(tpl.cot_system_2, user2, image_path);

    ConversationRecord rec;
    rec.id = id;
    rec.image = image_ref;
    rec.task = TaskKind::cot;
    rec.conversations = {{"human", "<image>\n" + q1},
                         {"gpt", a1},
                         {"human", q2},
                         {"gpt", a2}};
    validate(rec);
    return rec;
}

std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const uint32_t v = (static_cast<uint8_t>(bytes[i]) << 16) |
                           (static_cast<uint8_t>(bytes[i + 1]) << 8) |
                           static_cast<uint8_t>(bytes[i + 2]);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
        i += 3;
    }
    const size_t rem = bytes.size() - i;
    if (rem == 1) {
        const uint32_t v = static_cast<uint8_t>(bytes[i]) << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rem == 2) {
        const uint32_t v = (static_cast<uint8_t>(bytes[i]) << 16) |
                           (static_cast<uint8_t>(bytes[i + 1]) << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

}  // namespace visprompt

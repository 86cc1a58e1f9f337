#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "visprompt/element_detect.hpp"
#include "visprompt/layout.hpp"

namespace visprompt {

enum class TaskKind { web_annotation, layout_qa, cot };

const char* task_name(TaskKind t);
TaskKind task_from_name(const std::string& name);

struct Turn {
    std::string from;  // "human" or "gpt"
    std::string value;
};

struct ConversationRecord {
    std::string id;
    std::string image;  // relative path
    TaskKind task = TaskKind::web_annotation;
    std::vector<Turn> conversations;
};

// Throws InvalidInput when a record invariant is broken: turns must strictly
// alternate starting with human, the first human turn must begin with
// "<image>\n", and cot records must have exactly 4 turns.
void validate(const ConversationRecord& rec);

// splitmix64 stream. next_index uses rejection sampling so the distribution
// is unbiased and the draw sequence is identical on every platform.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}
    virtual ~Rng() = default;
    virtual uint64_t next_u64();
    virtual size_t next_index(size_t n);  // uniform in [0, n); n >= 1

  private:
    uint64_t state_;
};

uint64_t splitmix64(uint64_t& state);
uint64_t hash_string(const std::string& s);  // FNV-1a, for per-image seeds

// All dialogue wording lives here so it can be overridden from config.
// Placeholders: {text}, {label}, {bbox}, {category}, {count}, {q1}, {a1}.
struct QaTemplates {
    std::vector<std::string> web_question = {
        "Which numbered red box contains the text: \"{text}\"?"};
    std::string web_answer = "Box {label}";

    std::string layout_inventory_question =
        "List every layout block in this page with its bounding box.";
    std::string layout_inventory_item = "{category} at {bbox}";
    std::string layout_count_question =
        "How many {category} blocks does this page contain?";
    std::string layout_count_answer = "{count}";

    // Turns stored in cot records.
    std::string cot_question_1 =
        "Describe the content inside the red bounding box at {bbox}.";
    std::string cot_question_2 =
        "What page content would appear after clicking this element?";

    // Prompts sent to the completion client. The element text is kept as the
    // final quoted span so the offline client can recover it.
    std::string cot_system_1 =
        "You are an assistant that describes elements of webpage screenshots "
        "marked with a red bounding box.";
    std::string cot_user_1 =
        "Describe the content inside the red bounding box at {bbox}. "
        "The element text is \"{text}\".";
    std::string cot_system_2 =
        "You are an assistant that predicts webpage navigation.";
    std::string cot_user_2 =
        "Earlier question: {q1}\nEarlier answer: {a1}\nNow predict what page "
        "content would appear after clicking this element. "
        "The element text is \"{text}\".";
};

std::string apply_template(std::string tpl,
                           const std::vector<std::pair<std::string, std::string>>&
                               substitutions);

// "[x0, y0, x1, y1]" with each coordinate divided by the image extent and
// rounded half-up to 3 decimals.
std::string format_bbox_ratio(const Rect& rect, int img_w, int img_h);

// boxes[rng.next_index(boxes.size())]; empty list throws NoCandidates.
const ElementBox& select_box(const std::vector<ElementBox>& boxes, Rng& rng);

ConversationRecord make_web_annotation_record(const std::string& id,
                                              const std::string& image_ref,
                                              const std::vector<ElementBox>& boxes,
                                              const ElementBox& selected,
                                              Rng& rng,
                                              const QaTemplates& tpl = QaTemplates{});

// One inventory record plus one count record per category present (category
// enumeration order is fixed). Empty blocks give an empty list. id_prefix is
// extended with "_inventory" / "_count_<category>".
std::vector<ConversationRecord> make_layout_records(
    const std::string& id_prefix, const std::string& image_ref,
    const std::vector<LayoutBlock>& blocks, int img_w, int img_h,
    const QaTemplates& tpl = QaTemplates{});

// Two-round completion adapter: round 1 describes the boxed element, round 2
// predicts the post-click page. image is a path usable by HTTP adapters.
class CoTClient {
  public:
    virtual ~CoTClient() = default;
    virtual std::string complete(const std::string& system_prompt,
                                 const std::string& user_prompt,
                                 const std::string& image) = 0;
};

// Deterministic template answers; box text must be non-empty.
std::pair<std::string, std::string> offline_cot(const std::string& text);

// Hermetic client. Recovers the element text as the last double-quoted span
// of the user prompt and keys round 2 off the "after clicking" marker.
class OfflineCoTClient : public CoTClient {
  public:
    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt,
                         const std::string& image) override;
};

// POSTs {"system", "user", "image": <base64>} as JSON to the endpoint with an
// optional Bearer token and expects {"text": "..."} back. Any transport or
// decode failure throws ClientError.
class HttpCoTClient : public CoTClient {
  public:
    HttpCoTClient(std::string endpoint, std::string api_key);
    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt,
                         const std::string& image) override;

  private:
    std::string endpoint_;
    std::string api_key_;
};

// Builds the 4-turn record; client failures propagate as ClientError so the
// caller can skip the record and keep going.
ConversationRecord make_cot_record(const std::string& id,
                                   const std::string& image_ref,
                                   const std::string& image_path,
                                   const ElementBox& box, int img_w, int img_h,
                                   CoTClient& client,
                                   const QaTemplates& tpl = QaTemplates{});

std::string base64_encode(const std::string& bytes);

}  // namespace visprompt

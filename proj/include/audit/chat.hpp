#pragma once

#include <string>
#include <vector>

namespace audit {

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant"
    std::string content;
};

using ChatMessages = std::vector<ChatMessage>;

} // namespace audit

#pragma once

#include <random>
#include <string>

#include "vagent/protocol.hpp"

namespace vtest {

// Random printable text, sometimes with quotes, escapes and non-ASCII.
std::string random_text(std::mt19937_64& rng, std::size_t max_len = 40);

vagent::PersonaSpec random_persona(std::mt19937_64& rng);
vagent::FeedbackReport random_report(std::mt19937_64& rng);

vagent::ClientMessage random_client_message(std::mt19937_64& rng);
vagent::ServerMessage random_server_message(std::mt19937_64& rng);

}  // namespace vtest

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "honad/errors.hpp"

namespace honad {

/// Interned entity identifier; dense, assigned in first-seen order.
using EntityId = std::uint32_t;

/// String-to-id interning table shared by everything that touches a corpus.
/// Entity tokens are opaque labels; tokens may not be empty, contain
/// whitespace, or contain '|' (reserved as the node-name context separator).
class Vocab {
public:
    EntityId intern(std::string_view token) {
        auto it = ids_.find(std::string(token));
        if (it != ids_.end()) return it->second;
        validate(token);
        EntityId id = static_cast<EntityId>(tokens_.size());
        tokens_.emplace_back(token);
        ids_.emplace(tokens_.back(), id);
        return id;
    }

    const std::string& token(EntityId id) const { return tokens_.at(id); }

    std::size_t size() const { return tokens_.size(); }

    static void validate(std::string_view token) {
        if (token.empty())
            throw ParseError("entity token is empty");
        for (char c : token)
            if (c == '|' || c == ' ' || c == '\t' || c == '\n' || c == '\r')
                throw ParseError("entity token '" + std::string(token) +
                                 "' contains whitespace or '|'");
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, EntityId> ids_;
};

} // namespace honad

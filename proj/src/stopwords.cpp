#include "wombat/stopwords.hpp"

#include <algorithm>
#include <fstream>

#include "text_util.hpp"
#include "wombat/error.hpp"
#include "wombat/hash.hpp"

namespace wombat {

namespace {

// Version-pinned; changing this list requires a new id.
constexpr std::string_view kEnglishV1[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll",
    "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's",
    "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs",
    "themselves", "what", "which", "who", "whom", "this", "that", "that'll", "these", "those", "am",
    "is", "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does",
    "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while",
    "of", "at", "by", "for", "with", "about", "against", "between", "into", "through", "during",
    "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
    "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only",
    "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't",
    "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't",
    "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't",
    "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn",
    "needn't", "shan", "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won",
    "won't", "wouldn", "wouldn't"};

} // namespace

StopwordList::StopwordList(std::string id, std::vector<std::string> words)
    : id_(std::move(id)), words_(std::move(words))
{
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
    hash_ = sha256_hex(detail::join(words_, "\n"));
}

const StopwordList& StopwordList::english()
{
    static const StopwordList list("english-v1", std::vector<std::string>(std::begin(kEnglishV1), std::end(kEnglishV1)));
    return list;
}

StopwordList StopwordList::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read stopword list '" + path.string() + "'");
    }
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto word = detail::trim(line);
        if (!word.empty()) {
            words.emplace_back(word);
        }
    }
    return StopwordList(path.stem().string(), std::move(words));
}

bool StopwordList::contains(std::string_view word) const
{
    return std::binary_search(words_.begin(), words_.end(), word);
}

} // namespace wombat

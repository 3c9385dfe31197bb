#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ersatz/knowledge_base.hpp"

namespace ersatz {

// |a ∩ b| / |a ∪ b|, with J(∅,∅) defined as 0: absence of shared evidence
// must not certify similarity.
template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t intersection = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++intersection;
            ++ia;
            ++ib;
        }
    }
    const std::size_t unions = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

// Representative models: the qualities whose stored proportion is >= theta.
// `implies(X, q)` is read as the stored proportion (m for class concepts,
// d for function models).
RepresentativeModel representative_of_class(const KnowledgeBase& kb,
                                            const std::string& class_label,
                                            RepresentativeKind kind,
                                            double theta);
RepresentativeModel representative_of_function(const KnowledgeBase& kb,
                                               const QualityLabel& functional,
                                               double theta);

// O_F': representative functional qualities f whose function model's physical
// characterization is Jaccard-close to the class's representative physical
// model: J(O_rp, f_rp) > phi.
QualitySet relevant_functional_qualities(const KnowledgeBase& kb,
                                         const std::string& class_label,
                                         double theta, double phi);

// O_P': union over f in O_F' of (O_rp ∩ f_rp). When O_F' is empty the whole
// O_rp is used and the result is flagged as a fallback.
struct RelevantPhysical {
    QualitySet qualities;
    bool fallback = false;
};
RelevantPhysical relevant_physical_qualities(const KnowledgeBase& kb,
                                             const std::string& class_label,
                                             double theta, double phi);

enum class Verdict { Substitute, NotSubstitute };

struct Substitutability {
    double similarity = 0.0;
    Verdict verdict = Verdict::NotSubstitute;
};

// similarity = J(O^mu_P', O^beta_rp); Substitute iff similarity > phi
// (strict). Throws UnknownClassError for classes outside the store.
Substitutability substitutability(const KnowledgeBase& kb,
                                  const std::string& missing,
                                  const std::string& candidate, double theta,
                                  double phi);

struct RankedCandidate {
    std::string class_label;
    double similarity = 0.0;
    Verdict verdict = Verdict::NotSubstitute;

    bool operator==(const RankedCandidate&) const = default;
};

struct QueryExplanation {
    QualitySet relevant_functional;  // O_F'
    QualitySet relevant_physical;    // O_P'
    bool fallback = false;           // O_F' was empty; O_rp used instead
    // Per candidate: O_P' ∩ candidate's representative physical model.
    std::map<std::string, QualitySet> overlaps;
};

struct QueryResult {
    std::string missing_tool;
    std::vector<RankedCandidate> ranked_candidates;  // similarity desc
    std::optional<std::string> chosen;  // first Substitute, if any
    QueryExplanation explanation;
    bool cache_hit = false;
    double theta = 0.0;
    double phi = 0.0;
};

// Answers one substitution query. Reuses the cached substitution model for
// (missing, theta, phi) when present, otherwise computes the relevant sets
// and persists them via extend_with_substitution_model. Candidate verdicts
// from this query are merged into the cached model either way.
QueryResult answer_query(KnowledgeBase& kb, const std::string& missing,
                         const std::vector<std::string>& candidates,
                         double theta, double phi);

inline QueryResult answer_query(KnowledgeBase& kb, const std::string& missing,
                                const std::vector<std::string>& candidates) {
    return answer_query(kb, missing, candidates, kb.config.theta,
                        kb.config.phi);
}

}  // namespace ersatz

#pragma once

// Concept Separation Curves: perturbation-based evaluation of sentence
// embedders. Include this header for the whole library.

#include "csc/common.hpp"
#include "csc/corpus.hpp"
#include "csc/curves.hpp"
#include "csc/embed.hpp"
#include "csc/perturb.hpp"
#include "csc/pipeline.hpp"
#include "csc/remote.hpp"
#include "csc/report.hpp"

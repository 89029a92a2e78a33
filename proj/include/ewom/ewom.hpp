#pragma once

#include "ewom/assignment.hpp"
#include "ewom/causal_lingam.hpp"
#include "ewom/corpus.hpp"
#include "ewom/csv.hpp"
#include "ewom/entropy_keywords.hpp"
#include "ewom/error.hpp"
#include "ewom/linear_classifier.hpp"
#include "ewom/observation.hpp"
#include "ewom/random.hpp"
#include "ewom/synthgen.hpp"
#include "ewom/topic_pipeline.hpp"

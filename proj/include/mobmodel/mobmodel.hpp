#ifndef MOBMODEL_MOBMODEL_HPP
#define MOBMODEL_MOBMODEL_HPP

// Umbrella header for the whole toolkit.

#include "mobmodel/adapt.hpp"
#include "mobmodel/digest.hpp"
#include "mobmodel/errors.hpp"
#include "mobmodel/hierarchy.hpp"
#include "mobmodel/ingest.hpp"
#include "mobmodel/model.hpp"
#include "mobmodel/profiling.hpp"
#include "mobmodel/rng.hpp"
#include "mobmodel/sample.hpp"
#include "mobmodel/sessions.hpp"
#include "mobmodel/synth.hpp"
#include "mobmodel/validate.hpp"

#endif  // MOBMODEL_MOBMODEL_HPP

#pragma once

#include "reach/errors.hpp"
#include "reach/geometry.hpp"
#include "reach/integrator.hpp"
#include "reach/interval.hpp"
#include "reach/interval_integrator.hpp"
#include "reach/interval_matrix.hpp"
#include "reach/lrtng.hpp"
#include "reach/metric.hpp"
#include "reach/models.hpp"
#include "reach/special_functions.hpp"
#include "reach/stochastic.hpp"
#include "reach/vector_field.hpp"

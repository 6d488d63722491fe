#pragma once
// Umbrella header.

#include "lagcal/exterior.hpp"
#include "lagcal/expression.hpp"
#include "lagcal/form.hpp"
#include "lagcal/ambient_model.hpp"
#include "lagcal/catalog.hpp"
#include "lagcal/stencil.hpp"
#include "lagcal/grid.hpp"
#include "lagcal/lag_mesh.hpp"
#include "lagcal/potential.hpp"
#include "lagcal/mesh_io.hpp"
#include "lagcal/isotopy.hpp"
#include "lagcal/functionals.hpp"
#include "lagcal/slag.hpp"

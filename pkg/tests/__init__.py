# Tests for the Nielsen Orbit Lab

# Nielsen Orbit Lab

namespace whitlab {}

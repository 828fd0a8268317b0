package shop.search;

import java.util.Collections;
import java.util.List;

/**
 * Search index over product names. Returns search results for a query;
 * the query must be parsed first. Search results are ordered by score.
 */
public class SearchIndex {
    private int indexedProducts;

    public List<String> lookup(List<String> terms) {
        return Collections.emptyList();
    }
}

